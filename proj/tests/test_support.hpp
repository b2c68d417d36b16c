#pragma once

// Test-only helpers: synthetic masks with known homology, and oracles that
// do not share code paths with the library (exact modular rank, brute-force
// support rules, dense pseudoinverse projections).

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cubehodge/decompose.hpp"
#include "cubehodge/grid.hpp"
#include "cubehodge/manifold.hpp"

namespace cubehodge::testing {

using Point = std::array<int, 3>;

inline std::vector<std::uint8_t> flags_where(const GridComplex& grid, const std::function<bool(const Point&)>& pred) {
  std::vector<std::uint8_t> flags(grid.vertex_count());
  for (int v = 0; v < grid.vertex_count(); ++v) flags[v] = pred(grid.vertex_point(v)) ? 1 : 0;
  return flags;
}

inline double dist2(const Point& p, double cx, double cy, double cz = 0.0) {
  const double dx = p[0] - cx, dy = p[1] - cy, dz = p[2] - cz;
  return dx * dx + dy * dy + dz * dz;
}

inline bool in_box(const Point& p, const Point& lo, const Point& hi, int m) {
  for (int a = 0; a < m; ++a)
    if (p[a] < lo[a] || p[a] > hi[a]) return false;
  return true;
}

/// A synthetic domain with its Betti numbers beta_0..beta_{m-1} (the top one is 0).
struct KnownDomain {
  std::string name;
  Extents dims;
  std::function<bool(const Point&)> inside;
  std::vector<int> betti; // beta_0 .. beta_m
};

inline std::vector<KnownDomain> known_domains() {
  std::vector<KnownDomain> out;
  const double c = 15.5;
  out.push_back({"disk", {32, 32}, [=](const Point& p) { return dist2(p, c, c) <= 100.0; }, {1, 0, 0}});
  out.push_back({"annulus",
                 {32, 32},
                 [=](const Point& p) {
                   const double r2 = dist2(p, c, c);
                   return r2 >= 4.5 * 4.5 && r2 <= 121.0;
                 },
                 {1, 1, 0}});
  out.push_back({"three-holes",
                 {32, 32},
                 [=](const Point& p) {
                   if (dist2(p, c, c) > 169.0) return false;
                   for (int h = 0; h < 3; ++h) {
                     const double angle = M_PI / 2 + h * 2 * M_PI / 3;
                     if (dist2(p, c + 7 * std::cos(angle), c + 7 * std::sin(angle)) <= 9.0) return false;
                   }
                   return true;
                 },
                 {1, 3, 0}});
  out.push_back({"two-components",
                 {32, 32},
                 [=](const Point& p) { return dist2(p, c, 8.0) <= 36.0 || dist2(p, c, 23.0) <= 36.0; },
                 {2, 0, 0}});
  out.push_back({"ball", {12, 12, 12}, [](const Point& p) { return dist2(p, 5.5, 5.5, 5.5) <= 16.0; }, {1, 0, 0, 0}});
  out.push_back({"tunnel",
                 {12, 12, 12},
                 [](const Point& p) {
                   return in_box(p, {2, 2, 2}, {9, 9, 9}, 3) && !in_box(p, {4, 4, 0}, {7, 7, 11}, 3);
                 },
                 {1, 1, 0, 0}});
  out.push_back({"thick-shell",
                 {12, 12, 12},
                 [](const Point& p) {
                   return in_box(p, {1, 1, 1}, {10, 10, 10}, 3) && !in_box(p, {4, 4, 4}, {7, 7, 7}, 3);
                 },
                 {1, 0, 1, 0}});
  out.push_back({"two-balls",
                 {12, 12, 12},
                 [](const Point& p) {
                   return in_box(p, {1, 2, 2}, {4, 9, 9}, 3) || in_box(p, {7, 2, 2}, {10, 9, 9}, 3);
                 },
                 {2, 0, 0, 0}});
  return out;
}

/// Exact rank over GF(p), p = 2^31 - 1, by Gaussian elimination on a dense copy.
inline int rank_mod_p(const IncidenceMatrix& matrix) {
  constexpr std::int64_t p = 2147483647;
  const int rows = static_cast<int>(matrix.rows()), cols = static_cast<int>(matrix.cols());
  std::vector<std::vector<std::int64_t>> a(rows, std::vector<std::int64_t>(cols, 0));
  for (int r = 0; r < rows; ++r)
    for (IncidenceMatrix::InnerIterator it(matrix, r); it; ++it) a[r][it.col()] = ((it.value() % p) + p) % p;
  auto inverse = [&](std::int64_t x) {
    std::int64_t result = 1, e = p - 2;
    while (e > 0) {
      if (e & 1) result = result * x % p;
      x = x * x % p;
      e >>= 1;
    }
    return result;
  };
  int rank = 0;
  for (int col = 0; col < cols && rank < rows; ++col) {
    int pivot = -1;
    for (int r = rank; r < rows; ++r)
      if (a[r][col] != 0) {
        pivot = r;
        break;
      }
    if (pivot < 0) continue;
    std::swap(a[pivot], a[rank]);
    const std::int64_t inv = inverse(a[rank][col]);
    for (int r = rank + 1; r < rows; ++r) {
      if (a[r][col] == 0) continue;
      const std::int64_t f = a[r][col] * inv % p;
      for (int j = col; j < cols; ++j) a[r][j] = ((a[r][j] - f * a[rank][j]) % p + p) % p;
    }
    ++rank;
  }
  return rank;
}

/// dim ker of the combinatorial Laplacian at degree k from ranks:
/// n_k - rank D_k - rank D_{k-1}.
inline int kernel_dimension_by_rank(const GridComplex& grid, const SupportSet& support, int degree) {
  int dim = support.size(degree);
  if (degree < grid.dimension()) dim -= rank_mod_p(restricted_derivative(grid, support, degree));
  if (degree > 0) dim -= rank_mod_p(restricted_derivative(grid, support, degree - 1));
  return dim;
}

/// Brute-force support rule straight from the definitions: a normal cell has
/// an inside vertex; a tangential cell lies in an m-cell whose corner mean
/// reaches the threshold.
inline std::vector<std::uint8_t> brute_force_support(const GridComplex& grid, const std::vector<double>& image,
                                                     double threshold, int degree, BoundaryCondition condition) {
  const int m = grid.dimension();
  std::vector<std::uint8_t> out(grid.cell_count(degree), 0);
  for (int i = 0; i < grid.cell_count(degree); ++i) {
    const CellId cell = grid.cell_of(degree, i);
    if (condition == BoundaryCondition::normal) {
      for (int v : grid.cell_vertices(cell))
        if (image[v] >= threshold) out[i] = 1;
    } else {
      for (int cube : grid.incident_top_cells(cell)) {
        double sum = 0;
        const auto corners = grid.cell_vertices(grid.cell_of(m, cube));
        for (int v : corners) sum += image[v];
        if (sum / corners.size() >= threshold) out[i] = 1;
      }
    }
  }
  return out;
}

/// Orthogonal projection of x onto range(A) through a complete orthogonal
/// decomposition (dense pseudoinverse).
inline Eigen::VectorXd project_onto_range(const Eigen::MatrixXd& a, const Eigen::VectorXd& x) {
  if (a.cols() == 0 || a.rows() == 0) return Eigen::VectorXd::Zero(x.size());
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  cod.setThreshold(1e-10);
  return a * cod.solve(x);
}

inline Eigen::VectorXd random_vector(Eigen::Index n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, scale);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

inline std::vector<std::uint8_t> random_flags(int n, double probability, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution dist(probability);
  std::vector<std::uint8_t> flags(n);
  for (auto& f : flags) f = dist(rng) ? 1 : 0;
  return flags;
}

inline double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max(b.norm(), 1e-300);
  return (a - b).norm() / scale;
}

inline VertexMask all_inside(const GridComplex& g) {
  return mask_from_flags(g, std::vector<std::uint8_t>(g.vertex_count(), 1));
}

// Random mask from a thresholded smooth-ish random image.
inline VertexMask thresholded(const GridComplex& g, std::uint64_t seed) {
  const Eigen::VectorXd noise = random_vector(g.vertex_count(), seed);
  std::vector<double> image(g.vertex_count());
  for (int v = 0; v < g.vertex_count(); ++v) {
    const auto p = g.vertex_point(v);
    image[v] = std::sin(0.7 * p[0] + seed) * std::cos(0.5 * p[1]) + 0.3 * noise[v];
  }
  return segment(g, image, -0.2);
}

inline Eigen::MatrixXd dense(const IncidenceMatrix& m) { return Eigen::MatrixXd(m.cast<double>()); }

inline double energy_fraction(const Eigen::VectorXd& part, const Eigen::VectorXd& whole) {
  return part.squaredNorm() / whole.squaredNorm();
}

inline Eigen::VectorXd exact_normal_form(const GridComplex& g, const SupportSet& normal, std::uint64_t seed) {
  const IncidenceMatrix d = restricted_derivative(g, normal, 0);
  return normal.extend(1, d.cast<double>() * random_vector(normal.size(0), seed));
}

inline Eigen::VectorXd coexact_tangential_form(const GridComplex& g, const SupportSet& tangential, std::uint64_t seed) {
  const IncidenceMatrix d = restricted_derivative(g, tangential, 1);
  return tangential.extend(1, d.cast<double>().transpose() * random_vector(tangential.size(2), seed));
}

// Minimal-norm potentials and components from dense pseudoinverses of the
// same systems, written out from D and the star diagonals.
struct DenseOracle {
  Eigen::VectorXd wn, wt, w1, w2;
};

inline DenseOracle dense_oracle(const GridComplex& g, const VertexMask& mask, const Eigen::VectorXd& v,
                                LaplacianVariant variant) {
  const SupportSet n = build_support(g, mask, BoundaryCondition::normal);
  const SupportSet t = build_support(g, mask, BoundaryCondition::tangential);
  auto star = [&](const SupportSet& s, int k) {
    return variant == LaplacianVariant::big ? Eigen::VectorXd::Ones(s.size(k)).eval()
                                            : restricted_star(g, s, k).diagonal().eval();
  };
  auto pinv_solve = [](const Eigen::MatrixXd& a, const Eigen::VectorXd& b) -> Eigen::VectorXd {
    if (a.rows() == 0) return Eigen::VectorXd(0);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    cod.setThreshold(1e-10);
    return cod.solve(b);
  };
  DenseOracle out;
  {
    const Eigen::MatrixXd d0 = dense(restricted_derivative(g, n, 0));
    const Eigen::VectorXd s1 = star(n, 1);
    // L_{0,n} = D^T S_1 D
    const Eigen::MatrixXd l = d0.transpose() * s1.asDiagonal() * d0;
    const Eigen::VectorXd rhs = d0.transpose() * s1.cwiseProduct(n.restrict(1, v));
    out.wn = pinv_solve(l, rhs);
    out.w1 = n.extend(1, d0 * out.wn);
  }
  {
    const Eigen::MatrixXd d1 = dense(restricted_derivative(g, t, 1));
    const Eigen::VectorXd s2 = star(t, 2), s1 = star(t, 1);
    // L_{2,t} = S_2 D_1 S_1^{-1} D_1^T S_2, plus D_2^T S_3 D_2 in 3D
    const Eigen::MatrixXd sd = s2.asDiagonal() * d1;
    Eigen::MatrixXd l = sd * s1.cwiseInverse().asDiagonal() * sd.transpose();
    if (g.dimension() == 3) {
      const Eigen::MatrixXd d2 = dense(restricted_derivative(g, t, 2));
      l += d2.transpose() * star(t, 3).asDiagonal() * d2;
    }
    const Eigen::VectorXd rhs = s2.cwiseProduct(d1 * t.restrict(1, v));
    out.wt = pinv_solve(l, rhs);
    out.w2 = t.extend(1, (d1.transpose() * s2.cwiseProduct(out.wt)).cwiseQuotient(s1));
  }
  return out;
}

inline double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (b.norm() == 0.0) return a.norm();
  return (a - b).norm() / b.norm();
}

} // namespace cubehodge::testing
