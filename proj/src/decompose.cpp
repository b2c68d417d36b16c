#include "cubehodge/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cubehodge/errors.hpp"

namespace cubehodge {

namespace {

Eigen::VectorXd star_diagonal(const GridComplex& grid, const SupportSet& support, int degree,
                              LaplacianVariant variant) {
  if (variant == LaplacianVariant::big) return Eigen::VectorXd::Ones(support.size(degree));
  return restricted_star(grid, support, degree).diagonal();
}

void check_full_form(const Cochain& form, const GridComplex& grid, int degree) {
  check_cochain(form, degree, grid.cell_count(degree));
  if (form.support != Support::full) throw InvalidInput("decomposition input must be a full-grid cochain");
}

// Upper bound on the spectral norm, sqrt(max row sum * max column sum).
double norm_bound(const SparseMatrix& m) {
  if (m.nonZeros() == 0) return 0.0;
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(m.rows()), cols = Eigen::VectorXd::Zero(m.cols());
  for (int c = 0; c < m.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
      rows[it.row()] += std::abs(it.value());
      cols[it.col()] += std::abs(it.value());
    }
  return std::sqrt(rows.maxCoeff() * cols.maxCoeff());
}

// Right-hand sides are products with the input, so their roundoff scales with
// |D| |S| |V|; residuals below a small multiple of that are noise.
SolverOptions with_roundoff_floor(SolverOptions options, double scale) {
  options.absolute_tolerance = std::max(options.absolute_tolerance, 1e-13 * scale);
  return options;
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double floor) {
  const double na = std::max(a.norm(), floor);
  const double nb = std::max(b.norm(), floor);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::abs(a.dot(b)) / (na * nb);
}

} // namespace

double DecompositionDiagnostics::max_cosine() const {
  return std::max({cosine_exact_coexact, cosine_exact_harmonic, cosine_coexact_harmonic});
}

NormalPotentialSolver::NormalPotentialSolver(const GridComplex& grid, SupportSet support, int degree,
                                             LaplacianVariant variant, SolverOptions options)
    : grid_(&grid), support_(std::move(support)), degree_(degree), options_(options) {
  if (support_.condition() != BoundaryCondition::normal)
    throw InvalidInput("normal potential needs the normal support");
  if (degree < 1 || degree > grid.dimension())
    throw DegreeError("normal potential is defined for 1 <= k <= m, got k = " + std::to_string(degree));
  derivative_ = restricted_derivative(grid, support_, degree - 1).cast<double>();
  derivative_norm_ = norm_bound(derivative_);
  star_ = star_diagonal(grid, support_, degree, variant);
  laplacian_ = assemble(grid, support_, degree - 1, variant);
}

PotentialSolution NormalPotentialSolver::solve(const Cochain& form) const {
  check_full_form(form, *grid_, degree_);
  const Eigen::VectorXd local = support_.restrict(degree_, form.values);
  const Eigen::VectorXd weighted = star_.cwiseProduct(local);
  const Eigen::VectorXd rhs = derivative_.transpose() * weighted;
  PotentialSolution out;
  out.potential = conjugate_gradient(laplacian_.matrix, rhs,
                                     with_roundoff_floor(options_, derivative_norm_ * weighted.norm()), out.report);
  return out;
}

Eigen::VectorXd NormalPotentialSolver::component(const Eigen::VectorXd& potential) const {
  return support_.extend(degree_, derivative_ * potential);
}

TangentialPotentialSolver::TangentialPotentialSolver(const GridComplex& grid, SupportSet support, int degree,
                                                     LaplacianVariant variant, SolverOptions options)
    : grid_(&grid), support_(std::move(support)), degree_(degree), options_(options) {
  if (support_.condition() != BoundaryCondition::tangential)
    throw InvalidInput("tangential potential needs the tangential support");
  if (degree < 0 || degree >= grid.dimension())
    throw DegreeError("tangential potential is defined for 0 <= k < m, got k = " + std::to_string(degree));
  derivative_ = restricted_derivative(grid, support_, degree).cast<double>();
  derivative_norm_ = norm_bound(derivative_);
  star_ = star_diagonal(grid, support_, degree, variant);
  star_up_ = star_diagonal(grid, support_, degree + 1, variant);
  laplacian_ = assemble(grid, support_, degree + 1, variant);
}

PotentialSolution TangentialPotentialSolver::solve(const Cochain& form) const {
  check_full_form(form, *grid_, degree_);
  const Eigen::VectorXd local = support_.restrict(degree_, form.values);
  const Eigen::VectorXd rhs = star_up_.cwiseProduct(derivative_ * local);
  const double star_max = star_up_.size() > 0 ? star_up_.maxCoeff() : 0.0;
  PotentialSolution out;
  out.potential = conjugate_gradient(laplacian_.matrix, rhs,
                                     with_roundoff_floor(options_, star_max * derivative_norm_ * local.norm()),
                                     out.report);
  return out;
}

Eigen::VectorXd TangentialPotentialSolver::component(const Eigen::VectorXd& potential) const {
  const Eigen::VectorXd local = (derivative_.transpose() * star_up_.cwiseProduct(potential)).cwiseQuotient(star_);
  return support_.extend(degree_, local);
}

HodgeDecomposer::HodgeDecomposer(const GridComplex& grid, const VertexMask& mask, int degree,
                                 LaplacianVariant variant, SolverOptions options)
    : grid_(&grid), degree_(degree), empty_mask_(mask.empty()),
      normal_(grid, build_support(grid, mask, BoundaryCondition::normal), degree, variant, options),
      tangential_(grid, build_support(grid, mask, BoundaryCondition::tangential), degree, variant, options) {}

DecompositionResult HodgeDecomposer::decompose(const Cochain& form) const {
  check_full_form(form, *grid_, degree_);
  DecompositionResult result;
  PotentialSolution wn = normal_.solve(form);
  PotentialSolution wt = tangential_.solve(form);

  result.exact_normal = Cochain{degree_, Support::full, normal_.component(wn.potential)};
  result.coexact_tangential = Cochain{degree_, Support::full, tangential_.component(wt.potential)};
  result.harmonic = Cochain{degree_, Support::full,
                            form.values - result.exact_normal.values - result.coexact_tangential.values};
  result.potential_normal = std::move(wn.potential);
  result.potential_tangential = std::move(wt.potential);

  auto& diag = result.diagnostics;
  diag.normal_solve = wn.report;
  diag.tangential_solve = wt.report;
  diag.normal_support = normal_.support().sizes();
  diag.tangential_support = tangential_.support().sizes();
  diag.empty_mask = empty_mask_;
  // Components far below the input norm are CG noise; flooring the norms
  // keeps their cosines from reporting noise as non-orthogonality.
  const double floor = 1e-6 * form.values.norm();
  const auto& w1 = result.exact_normal.values;
  const auto& w2 = result.coexact_tangential.values;
  const auto& w3 = result.harmonic.values;
  diag.cosine_exact_coexact = cosine(w1, w2, floor);
  diag.cosine_exact_harmonic = cosine(w1, w3, floor);
  diag.cosine_coexact_harmonic = cosine(w2, w3, floor);
  return result;
}

PotentialSolution solve_potential_normal(const Cochain& form, const GridComplex& grid, const SupportSet& normal,
                                         LaplacianVariant variant, const SolverOptions& options) {
  return NormalPotentialSolver(grid, normal, form.degree, variant, options).solve(form);
}

PotentialSolution solve_potential_tangential(const Cochain& form, const GridComplex& grid,
                                             const SupportSet& tangential, LaplacianVariant variant,
                                             const SolverOptions& options) {
  return TangentialPotentialSolver(grid, tangential, form.degree, variant, options).solve(form);
}

DecompositionResult hodge_decompose(const Cochain& form, const GridComplex& grid, const VertexMask& mask,
                                    LaplacianVariant variant, const SolverOptions& options) {
  return HodgeDecomposer(grid, mask, 1, variant, options).decompose(form);
}

// ---------------------------------------------------------------------------

int decomposed_channel_count(int dimension, FieldMethod method) {
  const int per_field = 3 * dimension;
  return method == FieldMethod::channel_pair ? 3 * per_field : per_field;
}

Extents decomposed_extents(const Extents& dims, const ImageDecompositionConfig& config) {
  Extents out(dims);
  for (auto& e : out) {
    if (config.method == FieldMethod::patch) e /= config.params.patch_edge;
    e -= 1;
  }
  return out;
}

namespace {

void check_layout(const Image& image, const ImageDecompositionConfig& config) {
  check_image(image);
  const bool ok2d = image.dims.size() == 2 && (image.channels == 1 || image.channels == 3);
  const bool ok3d = image.dims.size() == 3 && image.channels == 1;
  if (!ok2d && !ok3d)
    throw InvalidInput("unsupported image layout: " + std::to_string(image.dims.size()) + "D with " +
                       std::to_string(image.channels) + " channels");
  if (config.method == FieldMethod::channel_pair && image.dims.size() != 2)
    throw InvalidInput("the channel-pair method needs a 2D image");
}

// Patch grid image whose value is the patch maximum, so a patch counts as
// foreground when any of its pixels does.
Image patch_maxima(const Image& scalar, int patch_edge) {
  const int m = static_cast<int>(scalar.dims.size());
  Image out;
  out.dims.resize(m);
  for (int a = 0; a < m; ++a) out.dims[a] = scalar.dims[a] / patch_edge;
  out.values.assign(static_cast<std::size_t>(out.vertex_count()), -std::numeric_limits<double>::infinity());
  std::vector<long long> stride(m, 1);
  for (int a = m - 2; a >= 0; --a) stride[a] = stride[a + 1] * out.dims[a + 1];
  for (long long v = 0; v < scalar.vertex_count(); ++v) {
    long long rest = v;
    long long target = 0;
    for (int a = m - 1; a >= 0; --a) {
      const int coord = static_cast<int>(rest % scalar.dims[a]);
      rest /= scalar.dims[a];
      target += (coord / patch_edge) * stride[a];
    }
    out.values[target] = std::max(out.values[target], scalar.values[v]);
  }
  return out;
}

} // namespace

DecomposedImage decomposed_image(const Image& image, const ImageDecompositionConfig& config) {
  check_layout(image, config);
  const Image scalar = luminance(image);

  std::vector<VertexField> fields;
  Image level = scalar;
  switch (config.method) {
  case FieldMethod::gradient:
    fields.push_back(gradient_field(scalar, config.params.forward_step, config.params.backward_step));
    break;
  case FieldMethod::flow:
    fields.push_back(flow_field(scalar, config.params.direction));
    break;
  case FieldMethod::channel_pair: {
    Image rgb = image;
    if (image.channels == 1) {
      rgb.channels = 3;
      rgb.values.resize(image.values.size() * 3);
      for (std::size_t v = 0; v < image.values.size(); ++v)
        for (int c = 0; c < 3; ++c) rgb.values[3 * v + c] = image.values[v];
    }
    for (auto& f : channel_pair_fields(rgb)) fields.push_back(std::move(f));
    break;
  }
  case FieldMethod::patch:
    fields.push_back(patch_topology_field(scalar, config.params.patch_edge, config.threshold));
    level = patch_maxima(scalar, config.params.patch_edge);
    break;
  }

  const GridComplex grid(level.dims, 1.0);
  const VertexMask mask = segment(grid, level.values, config.threshold);
  const HodgeDecomposer decomposer(grid, mask, 1, config.variant, config.solver);

  DecomposedImage out;
  for (const VertexField& field : fields) {
    const DecompositionResult result = decomposer.decompose(to_one_form(field, grid));
    out.components.push_back(to_cube_field(result.exact_normal, grid));
    out.components.push_back(to_cube_field(result.coexact_tangential, grid));
    out.components.push_back(to_cube_field(result.harmonic, grid));
    out.diagnostics.push_back(result.diagnostics);
  }

  const Extents cube_dims = out.components.front().dims;
  const long long cubes = extent_product(cube_dims);
  out.shape.push_back(0);
  for (int e : cube_dims) out.shape.push_back(e);
  out.data.reserve(static_cast<std::size_t>(cubes) * out.components.size() * grid.dimension());
  for (const CubeField& component : out.components) {
    for (const Eigen::VectorXd& channel : component.components) {
      out.data.insert(out.data.end(), channel.data(), channel.data() + channel.size());
      ++out.shape[0];
    }
  }
  return out;
}

} // namespace cubehodge
