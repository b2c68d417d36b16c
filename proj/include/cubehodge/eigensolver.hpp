#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "cubehodge/grid.hpp"

namespace cubehodge {

enum class EigenMethod : std::uint8_t { automatic, dense, shift_invert };

struct EigenOptions {
  EigenMethod method = EigenMethod::automatic;
  // automatic switches to the dense solver at or below this many rows; the
  // unblocked dense solve is already far slower than shift-invert at ~500
  int dense_limit = 200;
  int power_iterations = 100;
  int max_iterations = 1000;
  // shift-invert factorizes L + shift_factor * lambda_max * I
  double shift_factor = 1e-6;
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
};

/// Eigenpairs in ascending order; vectors are orthonormal columns.
struct EigenPairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  int iterations = 0;
  bool dense = false;
};

/// Largest eigenvalue of a symmetric PSD matrix by power iteration from a
/// seeded random start (Rayleigh quotient of the final iterate).
double estimate_lambda_max(const SparseMatrix& matrix, int iterations, std::uint64_t seed);

/// The `count` smallest eigenpairs of a symmetric PSD matrix.
EigenPairs smallest_eigenpairs(const SparseMatrix& matrix, int count, double lambda_max,
                               const EigenOptions& options = {});

/// Every eigenpair with eigenvalue below `threshold`. The search block starts
/// at `initial_block` vectors and doubles until an eigenvalue at or above the
/// threshold has been resolved.
EigenPairs eigenpairs_below(const SparseMatrix& matrix, double threshold, int initial_block, double lambda_max,
                            const EigenOptions& options = {});

/// Deterministic uniform(-0.5, 0.5) fill, shared by every seeded start vector.
Eigen::MatrixXd seeded_random(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

} // namespace cubehodge
