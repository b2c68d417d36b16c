#include "cubehodge/laplacian.hpp"

#include <string>

#include "cubehodge/errors.hpp"

namespace cubehodge {

namespace {

Eigen::VectorXd star_diagonal(const GridComplex& grid, const SupportSet& support, int degree,
                              LaplacianVariant variant) {
  if (variant == LaplacianVariant::big) return Eigen::VectorXd::Ones(support.size(degree));
  return restricted_star(grid, support, degree).diagonal();
}

} // namespace

LaplacianOperator assemble(const GridComplex& grid, const SupportSet& support, int degree,
                           LaplacianVariant variant) {
  const int m = grid.dimension();
  if (degree < 0 || degree > m) throw DegreeError("Laplacian degree " + std::to_string(degree) + " out of range");
  if (support.max_degree() != m)
    throw InvalidInput("support is missing degrees needed for the degree-" + std::to_string(degree) +
                       " Laplacian");

  const Eigen::Index n = support.size(degree);
  SparseMatrix laplacian(n, n);
  const Eigen::VectorXd star_k = star_diagonal(grid, support, degree, variant);

  if (degree < m) {
    const SparseMatrix d = restricted_derivative(grid, support, degree).cast<double>();
    const Eigen::VectorXd star_up = star_diagonal(grid, support, degree + 1, variant);
    laplacian += SparseMatrix(d.transpose() * star_up.asDiagonal() * d);
  }
  if (degree > 0) {
    const SparseMatrix d = restricted_derivative(grid, support, degree - 1).cast<double>();
    const Eigen::VectorXd star_down = star_diagonal(grid, support, degree - 1, variant);
    const SparseMatrix sd = star_k.asDiagonal() * d;
    laplacian += SparseMatrix(sd * star_down.cwiseInverse().asDiagonal() * sd.transpose());
  }
  // Sums of star-weighted products may round differently in (i,j) and (j,i).
  laplacian = SparseMatrix(0.5 * (laplacian + SparseMatrix(laplacian.transpose())));
  laplacian.prune(0.0);
  laplacian.makeCompressed();
  return LaplacianOperator{degree, support.condition(), variant, std::move(laplacian)};
}

HarmonicBasis harmonic_space(const LaplacianOperator& laplacian, int num_requested, double threshold_factor,
                             const EigenOptions& options) {
  HarmonicBasis basis;
  basis.degree = laplacian.degree;
  basis.condition = laplacian.condition;
  basis.variant = laplacian.variant;
  const Eigen::Index n = laplacian.matrix.rows();
  basis.lambda_max = estimate_lambda_max(laplacian.matrix, options.power_iterations, options.seed);
  basis.threshold = threshold_factor * basis.lambda_max;
  if (n == 0) {
    basis.vectors.resize(0, 0);
    return basis;
  }
  if (basis.lambda_max == 0.0) {
    basis.eigenvalues = Eigen::VectorXd::Zero(n);
    basis.vectors = Eigen::MatrixXd::Identity(n, n);
    return basis;
  }
  EigenPairs pairs = eigenpairs_below(laplacian.matrix, basis.threshold, num_requested, basis.lambda_max, options);
  basis.eigenvalues = std::move(pairs.values);
  basis.vectors = std::move(pairs.vectors);
  basis.iterations = pairs.iterations;
  return basis;
}

std::optional<int> betti(const GridComplex& grid, const VertexMask& mask, int degree, BoundaryCondition condition,
                         LaplacianVariant variant, const EigenOptions& options) {
  const int m = grid.dimension();
  if (degree < 0 || degree > m) throw DegreeError("Betti degree " + std::to_string(degree) + " out of range");
  const SupportSet support = build_support(grid, mask, condition);
  if (support.empty()) return std::nullopt;
  const int laplacian_degree = condition == BoundaryCondition::tangential ? degree : m - degree;
  return harmonic_space(assemble(grid, support, laplacian_degree, variant), 4, 1e-8, options).dimension();
}

std::vector<double> spectrum(const LaplacianOperator& laplacian, int count, const EigenOptions& options) {
  const double lambda_max = estimate_lambda_max(laplacian.matrix, options.power_iterations, options.seed);
  const EigenPairs pairs = smallest_eigenpairs(laplacian.matrix, count, lambda_max, options);
  return {pairs.values.data(), pairs.values.data() + pairs.values.size()};
}

} // namespace cubehodge
