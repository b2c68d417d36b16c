#pragma once

#include <Eigen/Core>

#include "cubehodge/grid.hpp"

namespace cubehodge {

struct SolverOptions {
  double tolerance = 1e-10;   // relative residual ||A x - b|| / ||b||
  int max_iterations_factor = 10; // iteration cap is factor * n
  // Residual norms at or below this count as converged whatever ||b|| is,
  // so right-hand sides made of roundoff do not chase an unreachable target.
  double absolute_tolerance = 0.0;
  // Extra CG passes on the true residual after the first convergence.
  int refinement_passes = 1;
};

struct SolveReport {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Unpreconditioned conjugate gradients from x = 0. For a consistent
/// symmetric PSD system the iterates stay in range(A), so the limit is the
/// minimal-norm solution. The cap covers all passes together. Throws
/// SolverError when the cap is reached.
Eigen::VectorXd conjugate_gradient(const SparseMatrix& matrix, const Eigen::VectorXd& rhs,
                                   const SolverOptions& options, SolveReport& report);

} // namespace cubehodge
