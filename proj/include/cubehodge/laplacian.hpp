#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cubehodge/eigensolver.hpp"
#include "cubehodge/grid.hpp"
#include "cubehodge/manifold.hpp"

namespace cubehodge {

/// hodge: stars from grid volume ratios. big: every star replaced by the
/// identity (boundary-induced graph Laplacian).
enum class LaplacianVariant : std::uint8_t { hodge, big };

struct LaplacianOperator {
  int degree = 0;
  BoundaryCondition condition = BoundaryCondition::normal;
  LaplacianVariant variant = LaplacianVariant::big;
  SparseMatrix matrix; // symmetric PSD, rows = support k-cells
};

/// Orthonormal basis of the numerical kernel of a Laplacian.
struct HarmonicBasis {
  int degree = 0;
  BoundaryCondition condition = BoundaryCondition::normal;
  LaplacianVariant variant = LaplacianVariant::big;
  double lambda_max = 0.0;
  double threshold = 0.0; // eigenvalues below this count as zero
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd vectors;
  int iterations = 0;

  int dimension() const { return static_cast<int>(vectors.cols()); }
};

/// L_k = D_k^T S_{k+1} D_k + S_k D_{k-1} S_{k-1}^{-1} D_{k-1}^T S_k on the
/// support; the first term is absent for k = m and the second for k = 0.
LaplacianOperator assemble(const GridComplex& grid, const SupportSet& support, int degree,
                           LaplacianVariant variant);

/// All eigenpairs with eigenvalue < threshold_factor * lambda_max, where
/// lambda_max comes from power iteration. A zero operator is all kernel.
HarmonicBasis harmonic_space(const LaplacianOperator& laplacian, int num_requested = 4,
                             double threshold_factor = 1e-8, const EigenOptions& options = {});

/// Betti number beta_k of the masked domain: dim ker L_{k,t} for the
/// tangential condition, dim ker L_{m-k,n} for the normal one. Empty
/// supports have no defined topology and give nullopt.
std::optional<int> betti(const GridComplex& grid, const VertexMask& mask, int degree,
                         BoundaryCondition condition, LaplacianVariant variant = LaplacianVariant::big,
                         const EigenOptions& options = {});

/// The `count` smallest eigenvalues in ascending order.
std::vector<double> spectrum(const LaplacianOperator& laplacian, int count, const EigenOptions& options = {});

} // namespace cubehodge
