#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cubehodge/grid.hpp"

namespace cubehodge {

enum class BoundaryCondition : std::uint8_t { normal, tangential };

/// The discrete manifold M as seen from the grid: which vertices lie in the
/// foreground, and which m-cell centers (dual vertices) do.
struct VertexMask {
  Extents dims;
  std::vector<std::uint8_t> inside;        // per grid vertex
  std::vector<std::uint8_t> center_inside; // per m-cell, dual vertex inside

  int inside_count() const;
  bool empty() const { return inside_count() == 0; }
};

/// Foreground extraction: inside[v] = image[v] >= threshold. A cell center is
/// inside when the mean of its corner values reaches the threshold, i.e. the
/// multilinear interpolant of the image at the center.
VertexMask segment(const GridComplex& grid, std::span<const double> image, double threshold);

/// Mask from explicit vertex flags. Equivalent to segmenting the 0/1
/// indicator image at 0.5, so a cell center is inside when at least half of
/// the cell's corners are.
VertexMask mask_from_flags(const GridComplex& grid, std::vector<std::uint8_t> flags);

/// Cells included under one boundary condition, per degree 0..m.
///
/// normal:     a k-cell is included iff one of its vertices is inside.
/// tangential: a k-cell is included iff one of the vertices of its dual cell
///             (the centers of the m-cells around it) is inside.
class SupportSet {
public:
  SupportSet(BoundaryCondition condition, std::vector<std::vector<std::uint8_t>> masks);

  BoundaryCondition condition() const { return condition_; }
  int max_degree() const { return static_cast<int>(masks_.size()) - 1; }

  int size(int degree) const;
  std::vector<int> sizes() const;
  bool empty() const;

  bool includes(int degree, int cell) const { return masks_.at(degree)[cell] != 0; }
  const std::vector<std::uint8_t>& mask(int degree) const { return masks_.at(degree); }
  /// Included grid cells in ascending index order; row r of P_k selects cells(k)[r].
  const std::vector<int>& cells(int degree) const { return cells_.at(degree); }
  /// Row of a grid cell in P_k, or -1 when excluded.
  int position(int degree, int cell) const { return positions_.at(degree)[cell]; }

  /// Row-selection matrix P_k: one unit entry per row, columns are all grid k-cells.
  IncidenceMatrix projection(int degree) const;

  /// P_k x: values of a full-grid cochain on the support.
  Eigen::VectorXd restrict(int degree, const Eigen::VectorXd& full) const;
  /// P_k^T y: zero-extension of a support cochain to the full grid.
  Eigen::VectorXd extend(int degree, const Eigen::VectorXd& local) const;

private:
  void check_degree(int degree) const;

  BoundaryCondition condition_;
  std::vector<std::vector<std::uint8_t>> masks_;
  std::vector<std::vector<int>> cells_;
  std::vector<std::vector<int>> positions_;
};

SupportSet build_support(const GridComplex& grid, const VertexMask& mask, BoundaryCondition condition);

/// D_{k,bc} = P_{k+1} D_k P_k^T.
IncidenceMatrix restricted_derivative(const GridComplex& grid, const SupportSet& support, int degree);

/// S_{k,bc} = P_k S_k P_k^T.
DiagonalMatrix restricted_star(const GridComplex& grid, const SupportSet& support, int degree);

} // namespace cubehodge
