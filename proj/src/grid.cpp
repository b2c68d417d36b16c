#include "cubehodge/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "cubehodge/errors.hpp"

namespace cubehodge {

namespace {

// Axis types of each degree, listed by ascending axis tuple so that
// x < y < z and xy < xz < yz.
std::vector<std::vector<AxisSet>> canonical_types(int m) {
  std::vector<std::vector<AxisSet>> types(m + 1);
  std::vector<std::pair<std::vector<int>, AxisSet>> all;
  for (AxisSet mask = 0; mask < (1u << m); ++mask) {
    std::vector<int> axes;
    for (int a = 0; a < m; ++a)
      if (mask & (1u << a)) axes.push_back(a);
    all.emplace_back(axes, mask);
  }
  std::sort(all.begin(), all.end());
  for (const auto& [axes, mask] : all) types[axes.size()].push_back(mask);
  return types;
}

int row_major_index(const Extents& extents, const std::array<int, 3>& p) {
  int index = 0;
  for (std::size_t a = 0; a < extents.size(); ++a) index = index * extents[a] + p[a];
  return index;
}

std::array<int, 3> row_major_point(const Extents& extents, int index) {
  std::array<int, 3> p{0, 0, 0};
  for (int a = static_cast<int>(extents.size()) - 1; a >= 0; --a) {
    p[a] = index % extents[a];
    index /= extents[a];
  }
  return p;
}

} // namespace

long long extent_product(const Extents& extents) {
  long long n = 1;
  for (int e : extents) n *= e;
  return n;
}

GridComplex::GridComplex(Extents dims, double spacing) : dims_(std::move(dims)), spacing_(spacing) {
  const int m = dimension();
  if (m != 2 && m != 3)
    throw InvalidGeometry("grid dimension must be 2 or 3, got " + std::to_string(m));
  for (int e : dims_)
    if (e < 2) throw InvalidGeometry("every grid extent must be at least 2, got " + std::to_string(e));
  if (!(spacing_ > 0.0) || !std::isfinite(spacing_))
    throw InvalidGeometry("grid spacing must be positive and finite");

  types_ = canonical_types(m);
  counts_.assign(m + 1, 0);
  for (int k = 0; k <= m; ++k) {
    for (AxisSet t : types_[k]) {
      type_offset_[t] = counts_[k];
      counts_[k] += static_cast<int>(extent_product(type_extents(t)));
    }
  }
  derivatives_.reserve(m);
  for (int k = 0; k < m; ++k) derivatives_.push_back(build_derivative(k));
}

void GridComplex::check_degree(int degree, int max_degree) const {
  if (degree < 0 || degree > max_degree)
    throw DegreeError("degree " + std::to_string(degree) + " outside [0, " +
                      std::to_string(max_degree) + "]");
}

int GridComplex::cell_count(int degree) const {
  check_degree(degree, dimension());
  return counts_[degree];
}

const std::vector<AxisSet>& GridComplex::cell_types(int degree) const {
  check_degree(degree, dimension());
  return types_[degree];
}

Extents GridComplex::type_extents(AxisSet axes) const {
  Extents e(dims_);
  for (int a = 0; a < dimension(); ++a)
    if (axes & (1u << a)) e[a] -= 1;
  return e;
}

int GridComplex::type_offset(AxisSet axes) const { return type_offset_[axes]; }

bool GridComplex::contains(const CellId& cell) const {
  if (cell.degree < 0 || cell.degree > dimension()) return false;
  if (std::popcount(cell.axes) != cell.degree || cell.axes >= (1u << dimension())) return false;
  const Extents e = type_extents(cell.axes);
  for (int a = 0; a < dimension(); ++a)
    if (cell.anchor[a] < 0 || cell.anchor[a] >= e[a]) return false;
  return true;
}

int GridComplex::index_of(const CellId& cell) const {
  if (!contains(cell)) throw InvalidInput("cell lies outside the grid");
  return type_offset_[cell.axes] + row_major_index(type_extents(cell.axes), cell.anchor);
}

CellId GridComplex::cell_of(int degree, int index) const {
  check_degree(degree, dimension());
  if (index < 0 || index >= counts_[degree]) throw InvalidInput("cell index out of range");
  const auto& types = types_[degree];
  std::size_t t = types.size() - 1;
  while (type_offset_[types[t]] > index) --t;
  CellId cell;
  cell.degree = degree;
  cell.axes = types[t];
  cell.anchor = row_major_point(type_extents(cell.axes), index - type_offset_[cell.axes]);
  return cell;
}

int GridComplex::vertex_index(const std::array<int, 3>& point) const {
  return row_major_index(dims_, point);
}

std::array<int, 3> GridComplex::vertex_point(int index) const { return row_major_point(dims_, index); }

std::vector<int> GridComplex::cell_vertices(const CellId& cell) const {
  std::vector<int> axes;
  for (int a = 0; a < dimension(); ++a)
    if (cell.axes & (1u << a)) axes.push_back(a);
  std::vector<int> out;
  out.reserve(std::size_t{1} << axes.size());
  for (unsigned corner = 0; corner < (1u << axes.size()); ++corner) {
    std::array<int, 3> p = cell.anchor;
    for (std::size_t r = 0; r < axes.size(); ++r)
      if (corner & (1u << r)) p[axes[r]] += 1;
    out.push_back(vertex_index(p));
  }
  return out;
}

std::vector<int> GridComplex::incident_top_cells(const CellId& cell) const {
  const int m = dimension();
  const AxisSet top = (1u << m) - 1;
  std::vector<int> free_axes;
  for (int a = 0; a < m; ++a)
    if (!(cell.axes & (1u << a))) free_axes.push_back(a);
  const Extents cube_extents = type_extents(top);
  std::vector<int> out;
  for (unsigned shift = 0; shift < (1u << free_axes.size()); ++shift) {
    std::array<int, 3> p = cell.anchor;
    bool inside = true;
    for (std::size_t r = 0; r < free_axes.size(); ++r) {
      const int a = free_axes[r];
      if (shift & (1u << r)) p[a] -= 1;
      if (p[a] < 0 || p[a] >= cube_extents[a]) inside = false;
    }
    if (inside) out.push_back(type_offset_[top] + row_major_index(cube_extents, p));
  }
  return out;
}

IncidenceMatrix GridComplex::build_derivative(int degree) const {
  const int m = dimension();
  IncidenceMatrix d(counts_[degree + 1], counts_[degree]);
  d.reserve(Eigen::VectorXi::Constant(counts_[degree + 1], 2 * (degree + 1)));
  for (AxisSet t : types_[degree + 1]) {
    std::vector<int> axes;
    for (int a = 0; a < m; ++a)
      if (t & (1u << a)) axes.push_back(a);
    const Extents e = type_extents(t);
    const int n = static_cast<int>(extent_product(e));
    for (int local = 0; local < n; ++local) {
      const int row = type_offset_[t] + local;
      const std::array<int, 3> anchor = row_major_point(e, local);
      // Boundary of [a_0 ... a_k]: sum_r (-1)^r (upper face_r - lower face_r).
      for (std::size_t r = 0; r < axes.size(); ++r) {
        const int sign = (r % 2 == 0) ? 1 : -1;
        const AxisSet face = t & ~(1u << axes[r]);
        const Extents fe = type_extents(face);
        std::array<int, 3> upper = anchor;
        upper[axes[r]] += 1;
        d.insert(row, type_offset_[face] + row_major_index(fe, anchor)) = -sign;
        d.insert(row, type_offset_[face] + row_major_index(fe, upper)) = sign;
      }
    }
  }
  d.makeCompressed();
  return d;
}

const IncidenceMatrix& GridComplex::exterior_derivative(int degree) const {
  check_degree(degree, dimension() - 1);
  return derivatives_[degree];
}

double GridComplex::star_ratio(int degree) const {
  check_degree(degree, dimension());
  return std::pow(spacing_, dimension() - 2 * degree);
}

DiagonalMatrix GridComplex::hodge_star(int degree) const {
  return DiagonalMatrix(Eigen::VectorXd::Constant(cell_count(degree), star_ratio(degree)));
}

GridComplex build_grid(const Extents& dims, double spacing) { return GridComplex(dims, spacing); }

const IncidenceMatrix& exterior_derivative(const GridComplex& grid, int degree) {
  return grid.exterior_derivative(degree);
}

DiagonalMatrix hodge_star(const GridComplex& grid, int degree) { return grid.hodge_star(degree); }

void check_cochain(const Cochain& cochain, int degree, Eigen::Index length) {
  if (cochain.degree != degree)
    throw InvalidInput("expected a " + std::to_string(degree) + "-cochain, got degree " +
                       std::to_string(cochain.degree));
  if (cochain.values.size() != length)
    throw InvalidInput("cochain length " + std::to_string(cochain.values.size()) +
                       " does not match support size " + std::to_string(length));
}

} // namespace cubehodge
