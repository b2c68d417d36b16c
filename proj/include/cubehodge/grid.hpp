#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace cubehodge {

/// Vertex counts per axis. Axis 0 is the slowest-varying index of a
/// row-major image array, so a (H, W) image has extents {H, W}.
using Extents = std::vector<int>;

/// Signed incidence matrices keep integer entries so that identities such as
/// D_{k+1} D_k = 0 can be checked exactly.
using IncidenceMatrix = Eigen::SparseMatrix<int, Eigen::RowMajor>;
using SparseMatrix = Eigen::SparseMatrix<double>;
using DiagonalMatrix = Eigen::DiagonalMatrix<double, Eigen::Dynamic>;

/// Bitmask of the coordinate axes a cell extends along: bit a set means the
/// cell has unit extent along axis a. Its popcount is the cell degree.
using AxisSet = unsigned;

/// Concrete identity of one cell in the full grid.
struct CellId {
  int degree = 0;
  AxisSet axes = 0;
  std::array<int, 3> anchor{0, 0, 0}; // lowest-indexed corner

  friend bool operator==(const CellId&, const CellId&) = default;
};

/// Which cell set a cochain lives on.
enum class Support : std::uint8_t { full, normal, tangential };

/// A discrete k-form: one value per k-cell of its support.
struct Cochain {
  int degree = 0;
  Support support = Support::full;
  Eigen::VectorXd values;
};

/// Cartesian cell complex of an m-dimensional grid (m = 2 or 3).
///
/// Cells of degree k are indexed 0..cell_count(k)-1. Within a degree, cells
/// are grouped by axis type in the order x < y < z for edges and
/// xy < xz < yz for 3D faces; inside a group the anchors run in row-major
/// order over the group's extents (axis 0 slowest). Every cell is oriented
/// positively along its axes.
///
/// The complex and its operators are immutable after construction.
class GridComplex {
public:
  GridComplex(Extents dims, double spacing);

  int dimension() const { return static_cast<int>(dims_.size()); }
  const Extents& dims() const { return dims_; }
  double spacing() const { return spacing_; }

  int cell_count(int degree) const;
  int vertex_count() const { return cell_count(0); }
  int cube_count() const { return cell_count(dimension()); }

  /// Axis types of degree-k cells in canonical order.
  const std::vector<AxisSet>& cell_types(int degree) const;
  /// Number of cells per axis for one axis type.
  Extents type_extents(AxisSet axes) const;
  /// First index of an axis type within its degree.
  int type_offset(AxisSet axes) const;

  int index_of(const CellId& cell) const;
  CellId cell_of(int degree, int index) const;
  bool contains(const CellId& cell) const;

  /// Grid vertex index of a point given in per-axis coordinates.
  int vertex_index(const std::array<int, 3>& point) const;
  std::array<int, 3> vertex_point(int index) const;

  /// Vertex indices of the 2^k corners of a cell.
  std::vector<int> cell_vertices(const CellId& cell) const;

  /// Indices of the m-cells having this cell as a face.
  std::vector<int> incident_top_cells(const CellId& cell) const;

  /// Signed incidence from k-cells to (k+1)-cells, 0 <= k < m.
  const IncidenceMatrix& exterior_derivative(int degree) const;

  /// Ratio of dual (m-k)-volume to primal k-volume, h^(m-2k).
  double star_ratio(int degree) const;
  DiagonalMatrix hodge_star(int degree) const;

private:
  void check_degree(int degree, int max_degree) const;
  IncidenceMatrix build_derivative(int degree) const;

  Extents dims_;
  double spacing_;
  std::vector<std::vector<AxisSet>> types_;
  std::array<int, 8> type_offset_{};
  std::vector<int> counts_;
  std::vector<IncidenceMatrix> derivatives_;
};

/// Builds the complex; throws InvalidGeometry for extents < 2, a dimension
/// other than 2 or 3, or non-positive spacing.
GridComplex build_grid(const Extents& dims, double spacing = 1.0);

const IncidenceMatrix& exterior_derivative(const GridComplex& grid, int degree);
DiagonalMatrix hodge_star(const GridComplex& grid, int degree);

/// Throws InvalidInput unless the cochain has the given degree and length.
void check_cochain(const Cochain& cochain, int degree, Eigen::Index length);

/// Product of the extents.
long long extent_product(const Extents& extents);

} // namespace cubehodge
