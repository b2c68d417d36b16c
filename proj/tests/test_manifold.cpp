#include <gtest/gtest.h>

#include "cubehodge/errors.hpp"
#include "cubehodge/manifold.hpp"
#include "test_support.hpp"

using namespace cubehodge;
using namespace cubehodge::testing;

namespace {

constexpr BoundaryCondition kConditions[] = {BoundaryCondition::normal, BoundaryCondition::tangential};

std::vector<double> as_image(const std::vector<std::uint8_t>& flags) {
  return std::vector<double>(flags.begin(), flags.end());
}

void expect_all_zero(const IncidenceMatrix& m) {
  for (int r = 0; r < m.outerSize(); ++r)
    for (IncidenceMatrix::InnerIterator it(m, r); it; ++it) ASSERT_EQ(it.value(), 0);
}

} // namespace

TEST(Segment, AllPositiveAtZeroThreshold) {
  const GridComplex g = build_grid({4, 5});
  const std::vector<double> image(g.vertex_count(), 0.25);
  const VertexMask mask = segment(g, image, 0.0);
  EXPECT_EQ(mask.inside_count(), g.vertex_count());
  EXPECT_FALSE(mask.empty());
}

TEST(Segment, ThresholdSelectsForeground) {
  const GridComplex g = build_grid({4, 4});
  std::vector<double> image(g.vertex_count(), 0.0);
  image[3] = image[7] = image[10] = 5.0;
  const VertexMask mask = segment(g, image, 1.0);
  for (int v = 0; v < g.vertex_count(); ++v) EXPECT_EQ(mask.inside[v], image[v] == 5.0 ? 1 : 0);
}

TEST(Segment, EmptyMaskIsFlagged) {
  const GridComplex g = build_grid({3, 3});
  const VertexMask mask = segment(g, std::vector<double>(9, 0.0), 1.0);
  EXPECT_TRUE(mask.empty());
}

TEST(Segment, ShapeMismatch) {
  const GridComplex g = build_grid({3, 3});
  EXPECT_THROW(segment(g, std::vector<double>(8, 1.0), 0.5), InvalidInput);
  EXPECT_THROW(mask_from_flags(g, std::vector<std::uint8_t>(10, 1)), InvalidInput);
  const GridComplex other = build_grid({3, 4});
  const VertexMask mask = mask_from_flags(other, std::vector<std::uint8_t>(12, 1));
  EXPECT_THROW(build_support(g, mask, BoundaryCondition::normal), InvalidInput);
}

TEST(Supports, AllInsideIncludesEverything) {
  for (const Extents& dims : {Extents{4, 5}, Extents{3, 4, 3}}) {
    const GridComplex g = build_grid(dims);
    const VertexMask mask = mask_from_flags(g, std::vector<std::uint8_t>(g.vertex_count(), 1));
    for (BoundaryCondition bc : kConditions) {
      const SupportSet s = build_support(g, mask, bc);
      for (int k = 0; k <= g.dimension(); ++k) {
        EXPECT_EQ(s.size(k), g.cell_count(k));
        const Eigen::MatrixXi p = Eigen::MatrixXi(s.projection(k));
        EXPECT_TRUE(p.isIdentity());
      }
    }
  }
}

TEST(Supports, SingleInteriorVertexNormal) {
  const GridComplex g = build_grid({5, 5});
  std::vector<std::uint8_t> flags(25, 0);
  const int center = g.vertex_index({2, 2, 0});
  flags[center] = 1;
  const SupportSet s = build_support(g, mask_from_flags(g, flags), BoundaryCondition::normal);
  EXPECT_EQ(s.cells(0), std::vector<int>{center});
  ASSERT_EQ(s.size(1), 4);
  for (int e : s.cells(1)) {
    const auto verts = g.cell_vertices(g.cell_of(1, e));
    EXPECT_TRUE(std::find(verts.begin(), verts.end(), center) != verts.end());
  }
  ASSERT_EQ(s.size(2), 4);
  for (int f : s.cells(2)) {
    const auto verts = g.cell_vertices(g.cell_of(2, f));
    EXPECT_TRUE(std::find(verts.begin(), verts.end(), center) != verts.end());
  }
}

TEST(Supports, SingleInteriorVertexTangentialMatchesBruteForce) {
  const GridComplex g = build_grid({5, 5});
  std::vector<std::uint8_t> flags(25, 0);
  flags[g.vertex_index({2, 2, 0})] = 1;
  // As a 0/1 flag set no face has half its corners inside: the support is empty.
  const SupportSet from_flags = build_support(g, mask_from_flags(g, flags), BoundaryCondition::tangential);
  const auto image = as_image(flags);
  for (int k = 0; k <= 2; ++k)
    EXPECT_EQ(from_flags.mask(k), brute_force_support(g, image, 0.5, k, BoundaryCondition::tangential));
  EXPECT_TRUE(from_flags.empty());

  // A bright vertex lifts the four surrounding face centers above threshold.
  std::vector<double> bright(25, 0.0);
  bright[g.vertex_index({2, 2, 0})] = 5.0;
  const SupportSet s = build_support(g, segment(g, bright, 1.0), BoundaryCondition::tangential);
  for (int k = 0; k <= 2; ++k)
    EXPECT_EQ(s.mask(k), brute_force_support(g, bright, 1.0, k, BoundaryCondition::tangential));
  EXPECT_EQ(s.size(0), 9);
  EXPECT_EQ(s.size(1), 12);
  EXPECT_EQ(s.size(2), 4);
}

TEST(Supports, RandomMasksMatchBruteForce) {
  for (const Extents& dims : {Extents{7, 6}, Extents{5, 4, 6}}) {
    const GridComplex g = build_grid(dims);
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> dist(0.0, 2.0);
      std::vector<double> image(g.vertex_count());
      for (auto& v : image) v = dist(rng);
      const VertexMask mask = segment(g, image, 1.2);
      for (BoundaryCondition bc : kConditions) {
        const SupportSet s = build_support(g, mask, bc);
        for (int k = 0; k <= g.dimension(); ++k) ASSERT_EQ(s.mask(k), brute_force_support(g, image, 1.2, k, bc));
      }
    }
  }
}

TEST(Supports, ProjectionRowsAreOrthonormal) {
  const GridComplex g = build_grid({6, 7});
  const SupportSet s = build_support(g, mask_from_flags(g, random_flags(42, 0.5, 3)), BoundaryCondition::normal);
  for (int k = 0; k <= 2; ++k) {
    const IncidenceMatrix p = s.projection(k);
    const IncidenceMatrix ppt = p * IncidenceMatrix(p.transpose());
    EXPECT_TRUE(Eigen::MatrixXi(ppt).isIdentity());
    const Eigen::VectorXd x = random_vector(g.cell_count(k), 10 + k);
    EXPECT_EQ(s.restrict(k, x), Eigen::VectorXd(p.cast<double>() * x));
    const Eigen::VectorXd y = random_vector(s.size(k), 20 + k);
    EXPECT_EQ(s.extend(k, y), Eigen::VectorXd(p.cast<double>().transpose() * y));
  }
}

TEST(Supports, MonotoneInTheInsideSet) {
  for (const Extents& dims : {Extents{8, 7}, Extents{5, 5, 4}}) {
    const GridComplex g = build_grid(dims);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto small = random_flags(g.vertex_count(), 0.3, seed);
      auto large = small;
      const auto extra = random_flags(g.vertex_count(), 0.3, seed + 100);
      for (std::size_t i = 0; i < large.size(); ++i) large[i] |= extra[i];
      for (BoundaryCondition bc : kConditions) {
        const SupportSet a = build_support(g, mask_from_flags(g, small), bc);
        const SupportSet b = build_support(g, mask_from_flags(g, large), bc);
        for (int k = 0; k <= g.dimension(); ++k)
          for (int i = 0; i < g.cell_count(k); ++i) {
            if (a.includes(k, i)) {
              ASSERT_TRUE(b.includes(k, i));
            }
          }
      }
    }
  }
}

TEST(RestrictedDerivative, AllInsideEqualsFullOperator) {
  const GridComplex g = build_grid({4, 3, 5});
  const VertexMask mask = mask_from_flags(g, std::vector<std::uint8_t>(g.vertex_count(), 1));
  for (BoundaryCondition bc : kConditions) {
    const SupportSet s = build_support(g, mask, bc);
    for (int k = 0; k < 3; ++k)
      EXPECT_EQ(Eigen::MatrixXi(restricted_derivative(g, s, k)), Eigen::MatrixXi(g.exterior_derivative(k)));
  }
}

TEST(RestrictedDerivative, ComplexPropertyOnRandomMask) {
  const GridComplex g = build_grid({6, 6});
  const VertexMask mask = mask_from_flags(g, random_flags(36, 0.5, 11));
  for (BoundaryCondition bc : kConditions) {
    const SupportSet s = build_support(g, mask, bc);
    expect_all_zero(restricted_derivative(g, s, 1) * restricted_derivative(g, s, 0));
  }
}

TEST(RestrictedDerivative, EqualsLiteralSandwich) {
  for (const Extents& dims : {Extents{6, 7}, Extents{4, 5, 4}}) {
    const GridComplex g = build_grid(dims);
    const VertexMask mask = mask_from_flags(g, random_flags(g.vertex_count(), 0.45, 5));
    for (BoundaryCondition bc : kConditions) {
      const SupportSet s = build_support(g, mask, bc);
      for (int k = 0; k < g.dimension(); ++k) {
        const IncidenceMatrix literal =
            s.projection(k + 1) * g.exterior_derivative(k) * IncidenceMatrix(s.projection(k).transpose());
        ASSERT_EQ(Eigen::MatrixXi(restricted_derivative(g, s, k)), Eigen::MatrixXi(literal));
      }
    }
  }
}

TEST(RestrictedDerivative, EmptyMaskGivesEmptyMatrices) {
  const GridComplex g = build_grid({4, 4});
  const VertexMask mask = mask_from_flags(g, std::vector<std::uint8_t>(16, 0));
  for (BoundaryCondition bc : kConditions) {
    const SupportSet s = build_support(g, mask, bc);
    EXPECT_TRUE(s.empty());
    for (int k = 0; k < 2; ++k) {
      const IncidenceMatrix d = restricted_derivative(g, s, k);
      EXPECT_EQ(d.rows(), 0);
      EXPECT_EQ(d.cols(), 0);
    }
    EXPECT_EQ(restricted_star(g, s, 1).rows(), 0);
  }
  const SupportSet s = build_support(g, mask, BoundaryCondition::normal);
  EXPECT_THROW(restricted_derivative(g, s, 2), DegreeError);
}

TEST(RestrictedStar, ScalesWithSpacing) {
  const GridComplex unit = build_grid({5, 5});
  const VertexMask mask = mask_from_flags(unit, random_flags(25, 0.6, 8));
  const SupportSet s = build_support(unit, mask, BoundaryCondition::normal);
  for (int k = 0; k <= 2; ++k) {
    const DiagonalMatrix star = restricted_star(unit, s, k);
    EXPECT_EQ(star.rows(), s.size(k));
    EXPECT_TRUE((star.diagonal().array() == 1.0).all());
  }
  const GridComplex coarse = build_grid({5, 5}, 2.0);
  const VertexMask full = mask_from_flags(coarse, std::vector<std::uint8_t>(25, 1));
  const SupportSet fs = build_support(coarse, full, BoundaryCondition::normal);
  EXPECT_TRUE((restricted_star(coarse, fs, 0).diagonal().array() == 4.0).all());
}
