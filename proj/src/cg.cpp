#include "cubehodge/cg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cubehodge/errors.hpp"

namespace cubehodge {

namespace {

struct Pass {
  Eigen::VectorXd x;
  long long iterations = 0;
  bool capped = false;
};

// Plain CG from zero until ||r|| <= target or the cap.
Pass cg_pass(const SparseMatrix& matrix, const Eigen::VectorXd& rhs, double target, long long cap) {
  const Eigen::Index n = rhs.size();
  Pass out{Eigen::VectorXd::Zero(n)};
  Eigen::VectorXd r = rhs;
  Eigen::VectorXd p = r;
  Eigen::VectorXd ap(n);
  double rr = r.squaredNorm();
  while (std::sqrt(rr) > target) {
    if (out.iterations >= cap) {
      out.capped = true;
      break;
    }
    ap.noalias() = matrix * p;
    const double curvature = p.dot(ap);
    if (!(curvature > 0.0)) break; // p in the kernel: nothing left to reduce
    const double alpha = rr / curvature;
    out.x.noalias() += alpha * p;
    r.noalias() -= alpha * ap;
    const double rr_next = r.squaredNorm();
    p = r + (rr_next / rr) * p;
    rr = rr_next;
    ++out.iterations;
  }
  return out;
}

} // namespace

Eigen::VectorXd conjugate_gradient(const SparseMatrix& matrix, const Eigen::VectorXd& rhs,
                                   const SolverOptions& options, SolveReport& report) {
  const Eigen::Index n = rhs.size();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  report = SolveReport{};
  const double rhs_norm = rhs.norm();
  if (rhs_norm <= options.absolute_tolerance || rhs_norm == 0.0) return x;

  const double target = std::max(options.tolerance * rhs_norm, options.absolute_tolerance);
  const long long cap = static_cast<long long>(options.max_iterations_factor) * std::max<Eigen::Index>(n, 1);
  long long iterations = 0;
  double residual = rhs_norm;
  Eigen::VectorXd r = rhs;
  // Each refinement pass solves for the correction from zero, so iterates
  // stay in the Krylov space of rhs and the minimal-norm limit is kept.
  for (int pass = 0; pass <= options.refinement_passes; ++pass) {
    const double pass_target =
        pass == 0 ? target : std::max(options.tolerance * residual, options.absolute_tolerance);
    if (pass > 0 && residual <= pass_target) break;
    Pass step = cg_pass(matrix, r, pass_target, cap - iterations);
    iterations += step.iterations;
    x += step.x;
    r = rhs - matrix * x; // true residual, not the recurrence
    residual = r.norm();
    if (step.capped && residual > target) {
      report.iterations = static_cast<int>(iterations);
      report.relative_residual = residual / rhs_norm;
      throw SolverError("conjugate gradients stopped at relative residual " +
                            std::to_string(report.relative_residual) + " after " + std::to_string(iterations) +
                            " iterations",
                        report.iterations, report.relative_residual);
    }
  }
  report.iterations = static_cast<int>(iterations);
  report.relative_residual = residual / rhs_norm;
  if (residual > 10.0 * target)
    throw SolverError("conjugate gradients broke down at relative residual " +
                          std::to_string(report.relative_residual),
                      report.iterations, report.relative_residual);
  return x;
}

} // namespace cubehodge
