#include "cubehodge/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SparseCholesky>

#include "cubehodge/errors.hpp"

namespace cubehodge {

namespace {

constexpr double kKernelResidual = 1e-10; // relative to lambda_max
constexpr double kRitzResidual = 1e-8;    // relative to the Ritz value

bool use_dense(Eigen::Index n, const EigenOptions& options) {
  return options.method == EigenMethod::dense ||
         (options.method == EigenMethod::automatic && n <= options.dense_limit);
}

EigenPairs dense_pairs(const SparseMatrix& matrix) {
  const Eigen::MatrixXd a = Eigen::MatrixXd(matrix);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success)
    throw SolverError("dense symmetric eigensolve failed", 0, std::numeric_limits<double>::quiet_NaN());
  EigenPairs out;
  out.values = solver.eigenvalues();
  out.vectors = solver.eigenvectors();
  out.dense = true;
  return out;
}

// Subspace iteration on (L + sigma I)^{-1} with a Rayleigh-Ritz step on L
// after every solve. Ritz values come out ascending.
class ShiftInvertIteration {
public:
  ShiftInvertIteration(const SparseMatrix& matrix, double shift) : matrix_(matrix) {
    SparseMatrix identity(matrix.rows(), matrix.cols());
    identity.setIdentity();
    const SparseMatrix shifted = matrix + shift * identity;
    factor_.compute(shifted);
    if (factor_.info() != Eigen::Success)
      throw SolverError("sparse LDLT factorization of the shifted operator failed", 0, shift);
  }

  void step(Eigen::MatrixXd& block) {
    const Eigen::MatrixXd solved = factor_.solve(block);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(solved);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(solved.rows(), solved.cols());
    const Eigen::MatrixXd lq = matrix_ * q;
    Eigen::MatrixXd projected = q.transpose() * lq;
    projected = 0.5 * (projected + projected.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(projected);
    block = q * ritz.eigenvectors();
    values_ = ritz.eigenvalues();
    const Eigen::MatrixXd lblock = lq * ritz.eigenvectors();
    residuals_.resize(block.cols());
    for (Eigen::Index j = 0; j < block.cols(); ++j)
      residuals_[j] = (lblock.col(j) - values_[j] * block.col(j)).norm();
  }

  const Eigen::VectorXd& values() const { return values_; }
  const Eigen::VectorXd& residuals() const { return residuals_; }

private:
  const SparseMatrix& matrix_;
  Eigen::SimplicialLDLT<SparseMatrix> factor_;
  Eigen::VectorXd values_;
  Eigen::VectorXd residuals_;
};

bool pair_converged(double value, double residual, double lambda_max) {
  return residual <= kKernelResidual * lambda_max + kRitzResidual * std::abs(value);
}

EigenPairs take_leading(const Eigen::MatrixXd& block, const Eigen::VectorXd& values, Eigen::Index count,
                        int iterations) {
  EigenPairs out;
  out.values = values.head(count);
  out.vectors = block.leftCols(count);
  out.iterations = iterations;
  return out;
}

} // namespace

Eigen::MatrixXd seeded_random(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i)
      out(i, j) = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
  return out;
}

double estimate_lambda_max(const SparseMatrix& matrix, int iterations, std::uint64_t seed) {
  if (matrix.rows() == 0) return 0.0;
  Eigen::VectorXd x = seeded_random(matrix.rows(), 1, seed).col(0);
  x.normalize();
  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXd y = matrix * x;
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    x = y / norm;
  }
  return std::max(0.0, x.dot(matrix * x));
}

EigenPairs smallest_eigenpairs(const SparseMatrix& matrix, int count, double lambda_max,
                               const EigenOptions& options) {
  const Eigen::Index n = matrix.rows();
  if (count < 0 || count > n)
    throw ParameterError("requested " + std::to_string(count) + " eigenvalues of a " + std::to_string(n) +
                         "-dimensional operator");
  if (count == 0) return EigenPairs{Eigen::VectorXd(0), Eigen::MatrixXd(n, 0), 0, false};
  if (use_dense(n, options)) {
    EigenPairs all = dense_pairs(matrix);
    all.values.conservativeResize(count);
    all.vectors.conservativeResize(n, count);
    return all;
  }

  const Eigen::Index block_size = std::min<Eigen::Index>(n, 2 * count + 8);
  ShiftInvertIteration iteration(matrix, options.shift_factor * std::max(lambda_max, 1e-300));
  Eigen::MatrixXd block = seeded_random(n, block_size, options.seed);
  double worst = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= options.max_iterations; ++it) {
    iteration.step(block);
    bool done = true;
    worst = 0.0;
    for (Eigen::Index j = 0; j < count; ++j) {
      worst = std::max(worst, iteration.residuals()[j]);
      done = done && pair_converged(iteration.values()[j], iteration.residuals()[j], lambda_max);
    }
    if (done || block_size == n) return take_leading(block, iteration.values(), count, it);
  }
  throw SolverError("shift-invert subspace iteration did not converge after " +
                        std::to_string(options.max_iterations) + " iterations",
                    options.max_iterations, worst);
}

EigenPairs eigenpairs_below(const SparseMatrix& matrix, double threshold, int initial_block, double lambda_max,
                            const EigenOptions& options) {
  const Eigen::Index n = matrix.rows();
  if (n == 0) return EigenPairs{Eigen::VectorXd(0), Eigen::MatrixXd(0, 0), 0, false};
  auto below = [&](const Eigen::VectorXd& values) {
    Eigen::Index d = 0;
    while (d < values.size() && values[d] < threshold) ++d;
    return d;
  };

  if (use_dense(n, options)) {
    EigenPairs all = dense_pairs(matrix);
    const Eigen::Index d = below(all.values);
    all.values.conservativeResize(d);
    all.vectors.conservativeResize(n, d);
    return all;
  }

  Eigen::Index block_size = std::min<Eigen::Index>(n, std::max(initial_block, 1) + 8);
  ShiftInvertIteration iteration(matrix, options.shift_factor * std::max(lambda_max, 1e-300));
  Eigen::MatrixXd block = seeded_random(n, block_size, options.seed);
  double worst = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= options.max_iterations; ++it) {
    iteration.step(block);
    const Eigen::VectorXd& values = iteration.values();
    const Eigen::VectorXd& residuals = iteration.residuals();
    const Eigen::Index d = below(values);

    if (block_size == n) return take_leading(block, values, d, it);
    if (d == block_size) {
      // Every Ritz value is below the threshold: the kernel may be larger
      // than the block, so widen it and keep iterating.
      const Eigen::Index grown = std::min<Eigen::Index>(n, 2 * block_size);
      Eigen::MatrixXd wider(n, grown);
      wider << block, seeded_random(n, grown - block_size, options.seed + static_cast<std::uint64_t>(it));
      block = std::move(wider);
      block_size = grown;
      continue;
    }

    bool done = it >= 2;
    worst = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      worst = std::max(worst, residuals[j]);
      done = done && pair_converged(values[j], residuals[j], lambda_max);
    }
    // The first Ritz value above the threshold must be resolved well enough
    // that no eigenvalue below the threshold can still be hiding behind it.
    done = done && values[d] - residuals[d] >= threshold && residuals[d] <= 0.1 * values[d];
    if (done) return take_leading(block, values, d, it);
  }
  throw SolverError("shift-invert subspace iteration did not resolve the eigenvalues below " +
                        std::to_string(threshold) + " after " + std::to_string(options.max_iterations) +
                        " iterations",
                    options.max_iterations, worst);
}

} // namespace cubehodge
