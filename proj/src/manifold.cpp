#include "cubehodge/manifold.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "cubehodge/errors.hpp"

namespace cubehodge {

namespace {

void check_mask_shape(const GridComplex& grid, const VertexMask& mask) {
  if (mask.dims != grid.dims() || static_cast<int>(mask.inside.size()) != grid.vertex_count() ||
      static_cast<int>(mask.center_inside.size()) != grid.cube_count())
    throw InvalidInput("vertex mask does not match the grid");
}

// Marks every face (all degrees) of each m-cell whose center is inside.
std::vector<std::vector<std::uint8_t>> tangential_masks(const GridComplex& grid, const VertexMask& mask) {
  const int m = grid.dimension();
  std::vector<std::vector<std::uint8_t>> masks(m + 1);
  for (int k = 0; k <= m; ++k) masks[k].assign(grid.cell_count(k), 0);

  const AxisSet top = (1u << m) - 1;
  const int offset = grid.type_offset(top);
  for (int c = 0; c < grid.cube_count(); ++c) {
    if (!mask.center_inside[c]) continue;
    const CellId cube = grid.cell_of(m, offset + c);
    for (int k = 0; k <= m; ++k) {
      for (AxisSet t : grid.cell_types(k)) {
        // Faces of type t sit at the cube anchor shifted by 0/1 along axes not in t.
        std::vector<int> free_axes;
        for (int a = 0; a < m; ++a)
          if (!(t & (1u << a))) free_axes.push_back(a);
        for (unsigned shift = 0; shift < (1u << free_axes.size()); ++shift) {
          CellId face{k, t, cube.anchor};
          for (std::size_t r = 0; r < free_axes.size(); ++r)
            if (shift & (1u << r)) face.anchor[free_axes[r]] += 1;
          masks[k][grid.index_of(face)] = 1;
        }
      }
    }
  }
  return masks;
}

std::vector<std::vector<std::uint8_t>> normal_masks(const GridComplex& grid, const VertexMask& mask) {
  const int m = grid.dimension();
  std::vector<std::vector<std::uint8_t>> masks(m + 1);
  for (int k = 0; k <= m; ++k) {
    masks[k].assign(grid.cell_count(k), 0);
    for (int i = 0; i < grid.cell_count(k); ++i) {
      for (int v : grid.cell_vertices(grid.cell_of(k, i))) {
        if (mask.inside[v]) {
          masks[k][i] = 1;
          break;
        }
      }
    }
  }
  return masks;
}

} // namespace

int VertexMask::inside_count() const {
  return static_cast<int>(std::count(inside.begin(), inside.end(), std::uint8_t{1}));
}

VertexMask segment(const GridComplex& grid, std::span<const double> image, double threshold) {
  if (static_cast<int>(image.size()) != grid.vertex_count())
    throw InvalidInput("image has " + std::to_string(image.size()) + " values but the grid has " +
                       std::to_string(grid.vertex_count()) + " vertices");
  VertexMask mask;
  mask.dims = grid.dims();
  mask.inside.resize(image.size());
  for (std::size_t v = 0; v < image.size(); ++v) mask.inside[v] = image[v] >= threshold ? 1 : 0;

  const int m = grid.dimension();
  const int offset = grid.type_offset((1u << m) - 1);
  const double corners = static_cast<double>(1 << m);
  mask.center_inside.resize(grid.cube_count());
  for (int c = 0; c < grid.cube_count(); ++c) {
    double sum = 0.0;
    for (int v : grid.cell_vertices(grid.cell_of(m, offset + c))) sum += image[v];
    mask.center_inside[c] = sum / corners >= threshold ? 1 : 0;
  }
  return mask;
}

VertexMask mask_from_flags(const GridComplex& grid, std::vector<std::uint8_t> flags) {
  if (static_cast<int>(flags.size()) != grid.vertex_count())
    throw InvalidInput("flag count does not match the grid vertex count");
  std::vector<double> indicator(flags.size());
  for (std::size_t v = 0; v < flags.size(); ++v) indicator[v] = flags[v] ? 1.0 : 0.0;
  return segment(grid, indicator, 0.5);
}

SupportSet::SupportSet(BoundaryCondition condition, std::vector<std::vector<std::uint8_t>> masks)
    : condition_(condition), masks_(std::move(masks)) {
  cells_.resize(masks_.size());
  positions_.resize(masks_.size());
  for (std::size_t k = 0; k < masks_.size(); ++k) {
    positions_[k].assign(masks_[k].size(), -1);
    for (std::size_t i = 0; i < masks_[k].size(); ++i) {
      if (masks_[k][i]) {
        positions_[k][i] = static_cast<int>(cells_[k].size());
        cells_[k].push_back(static_cast<int>(i));
      }
    }
  }
}

void SupportSet::check_degree(int degree) const {
  if (degree < 0 || degree > max_degree())
    throw DegreeError("support has no degree " + std::to_string(degree));
}

int SupportSet::size(int degree) const {
  check_degree(degree);
  return static_cast<int>(cells_[degree].size());
}

std::vector<int> SupportSet::sizes() const {
  std::vector<int> out;
  for (const auto& c : cells_) out.push_back(static_cast<int>(c.size()));
  return out;
}

bool SupportSet::empty() const {
  return std::all_of(cells_.begin(), cells_.end(), [](const auto& c) { return c.empty(); });
}

IncidenceMatrix SupportSet::projection(int degree) const {
  check_degree(degree);
  const auto& c = cells_[degree];
  IncidenceMatrix p(static_cast<Eigen::Index>(c.size()), static_cast<Eigen::Index>(masks_[degree].size()));
  p.reserve(Eigen::VectorXi::Ones(static_cast<Eigen::Index>(c.size())));
  for (std::size_t r = 0; r < c.size(); ++r) p.insert(static_cast<Eigen::Index>(r), c[r]) = 1;
  p.makeCompressed();
  return p;
}

Eigen::VectorXd SupportSet::restrict(int degree, const Eigen::VectorXd& full) const {
  check_degree(degree);
  if (full.size() != static_cast<Eigen::Index>(masks_[degree].size()))
    throw InvalidInput("full-grid vector length does not match the grid");
  const auto& c = cells_[degree];
  Eigen::VectorXd out(static_cast<Eigen::Index>(c.size()));
  for (std::size_t r = 0; r < c.size(); ++r) out[static_cast<Eigen::Index>(r)] = full[c[r]];
  return out;
}

Eigen::VectorXd SupportSet::extend(int degree, const Eigen::VectorXd& local) const {
  check_degree(degree);
  const auto& c = cells_[degree];
  if (local.size() != static_cast<Eigen::Index>(c.size()))
    throw InvalidInput("support vector length does not match the support");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(masks_[degree].size()));
  for (std::size_t r = 0; r < c.size(); ++r) out[c[r]] = local[static_cast<Eigen::Index>(r)];
  return out;
}

SupportSet build_support(const GridComplex& grid, const VertexMask& mask, BoundaryCondition condition) {
  check_mask_shape(grid, mask);
  return SupportSet(condition, condition == BoundaryCondition::normal ? normal_masks(grid, mask)
                                                                     : tangential_masks(grid, mask));
}

IncidenceMatrix restricted_derivative(const GridComplex& grid, const SupportSet& support, int degree) {
  const IncidenceMatrix& d = grid.exterior_derivative(degree);
  if (support.max_degree() != grid.dimension()) throw InvalidInput("support does not match the grid");
  const auto& rows = support.cells(degree + 1);
  IncidenceMatrix out(static_cast<Eigen::Index>(rows.size()), support.size(degree));
  Eigen::VectorXi reserve(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) reserve[static_cast<Eigen::Index>(r)] = d.outerIndexPtr()[rows[r] + 1] - d.outerIndexPtr()[rows[r]];
  out.reserve(reserve);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (IncidenceMatrix::InnerIterator it(d, rows[r]); it; ++it) {
      const int col = support.position(degree, static_cast<int>(it.col()));
      if (col >= 0) out.insert(static_cast<Eigen::Index>(r), col) = it.value();
    }
  }
  out.makeCompressed();
  return out;
}

DiagonalMatrix restricted_star(const GridComplex& grid, const SupportSet& support, int degree) {
  const double ratio = grid.star_ratio(degree);
  return DiagonalMatrix(Eigen::VectorXd::Constant(support.size(degree), ratio));
}

} // namespace cubehodge
