#include <cmath>

#include <gtest/gtest.h>

#include "llrgd/corpus.hpp"
#include "llrgd/region.hpp"

using namespace llrgd;

TEST(CellGrid, IndexingAndNeighbours) {
  const CellGrid g(cube(2, 0.0, 1.0), 4);
  EXPECT_EQ(g.cell_count(), 16u);
  EXPECT_EQ(g.index(g.coords(9)), 9u);
  EXPECT_EQ(g.center(0), (Vector{0.125, 0.125}));
  EXPECT_EQ(g.neighbors(0).size(), 2u);
  EXPECT_EQ(g.neighbors(5).size(), 4u);
  EXPECT_EQ(g.halo(5).size(), 9u);
  EXPECT_EQ(*g.cell_of({1.0, 1.0}), 15u);
  EXPECT_FALSE(g.cell_of({1.5, 0.5}).has_value());
  EXPECT_THROW(CellGrid(cube(4, 0.0, 1.0), 4), ConfigError);
  EXPECT_THROW(CellGrid(cube(2, 0.0, 1.0), 0), ConfigError);
}

TEST(Region, CubicValleyMatchesQuarticDisc) {
  const auto f = cubic_valley().objective;
  const auto r = theta_region(f, {0.0, 0.0}, 1.0, cube(2, -2.0, 2.0), 400);
  std::size_t oracle = 0;
  for (std::size_t idx = 0; idx < r.grid.cell_count(); ++idx) {
    const Vector c = r.grid.center(idx);
    const bool in_disc = std::pow(c[0], 4) + c[1] * c[1] <= 1.0;
    oracle += in_disc;
    ASSERT_EQ(static_cast<bool>(r.inside[idx]), in_disc) << c[0] << "," << c[1];
  }
  EXPECT_EQ(r.inside_count(), oracle);
  EXPECT_FALSE(r.contains({1.5, 0.0}));
  EXPECT_TRUE(r.contains({0.9, 0.1}));
  EXPECT_GT(r.boundary_cells().size(), 0u);
  for (std::size_t idx : r.boundary_cells()) EXPECT_TRUE(r.inside[idx]);
}

TEST(Region, LargeThresholdCoversBox) {
  const auto r = theta_region(cubic_valley().objective, {0.0, 0.0}, 5.0, cube(2, -2.0, 2.0), 50);
  EXPECT_EQ(r.inside_count(), 2500u);
  EXPECT_TRUE(r.boundary_cells().empty());
}

TEST(Region, CubicConeContainsStartOfFigureRun) {
  const auto r = theta_region(cubic_cone().objective, {0.0, 0.0}, 3.0, cube(2, -4.0, 4.0), 400);
  EXPECT_TRUE(r.contains({1.5, 0.5}));
  EXPECT_FALSE(r.contains({2.0, 0.0}));
}

TEST(Region, OneDimensionalComponentsAreSeparated) {
  const auto f = double_degenerate().objective;
  const auto r = theta_region(f, {1.0}, 0.1, f.domain_box(), 4000);
  EXPECT_TRUE(r.contains({1.0}));
  EXPECT_FALSE(r.contains({0.0}));
  EXPECT_FALSE(r.contains({-1.0}));
}

TEST(Region, RejectsBadInputs) {
  const auto f = cubic_valley().objective;
  EXPECT_THROW(theta_region(f, {1.5, 0.0}, 1.0, cube(2, -2.0, 2.0), 40), ConfigError);
  EXPECT_THROW(theta_region(f, {0.0, 0.0}, 0.0, cube(2, -2.0, 2.0), 40), ConfigError);
  EXPECT_THROW(theta_region(f, {0.0, 0.0}, 1.0, cube(3, -2.0, 2.0), 40), DimensionError);
  const auto bowl4 = quadratic_bowl(1.0, 4).objective;
  try {
    theta_region(bowl4, Vector(4, 0.0), 1.0, cube(4, -1.0, 1.0), 4);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("unsupported dimension"), std::string::npos);
  }
}

TEST(Region, ThreeDimensionalBowlIsBall) {
  const auto bowl = quadratic_bowl(1.0, 3).objective;
  const auto r = theta_region(bowl, Vector(3, 0.0), 1.0, cube(3, -1.5, 1.5), 30);
  for (std::size_t idx = 0; idx < r.grid.cell_count(); ++idx)
    ASSERT_EQ(static_cast<bool>(r.inside[idx]), norm2(r.grid.center(idx)) <= 1.0);
}

TEST(Boundary, ClassifyExamples) {
  const auto valley = cubic_valley().objective;
  EXPECT_DOUBLE_EQ(boundary_product(valley, {-1.0, 0.0}, {0.0, 0.0}), -2.0);
  EXPECT_EQ(boundary_classify(valley, {-1.0, 0.0}, {0.0, 0.0}), BoundaryFlow::Exit);
  EXPECT_EQ(boundary_classify(valley, {0.0, 0.0}, {0.7, -3.0}), BoundaryFlow::Tangent);
  const auto bowl = quadratic_bowl().objective;
  EXPECT_DOUBLE_EQ(boundary_product(bowl, {0.3, 0.4}, {0.0, 0.0}), 0.25);
  EXPECT_EQ(boundary_classify(bowl, {0.3, 0.4}, {0.0, 0.0}), BoundaryFlow::Enter);
}

TEST(Boundary, ZeroRegularizerHoldsVacuously) {
  const auto f = cubic_cone().objective;
  const auto r = theta_region(f, {0.0, 0.0}, 3.0, cube(2, -4.0, 4.0), 200);
  const auto audit = check_boundary_assumption(f, r, {0.0, 0.0});
  EXPECT_TRUE(audit.holds);
  EXPECT_EQ(audit.exit_cells_l, audit.exit_cells_0);
  EXPECT_EQ(audit.boundary_cells, r.boundary_cells().size());
}

TEST(Boundary, BowlBoundaryIsAllEnter) {
  const auto f = quadratic_bowl().objective;
  const auto r = theta_region(f, {0.0, 0.0}, 1.0, cube(2, -2.0, 2.0), 200);
  for (std::size_t idx : r.boundary_cells())
    EXPECT_EQ(boundary_classify(f, r.grid.center(idx), {0.0, 0.0}), BoundaryFlow::Enter);
  EXPECT_EQ(check_boundary_assumption(f, r, {0.0, 0.0}).exit_cells_0, 0u);
}

TEST(Boundary, AuditReportsCellsAgainstAnalyticSign) {
  // Independent oracle: s₀ = 2x(x⁴ + 10x²y² + 5y⁴) for x³/3 + xy², and
  // s_l = s₀ + lᵀH∇f with H = [[2x, 2y], [2y, 2x]].
  const auto f = cubic_cone().objective;
  const Vector l{2.5, 1.5};
  const auto r = theta_region(f, {0.0, 0.0}, 3.0, cube(2, -4.0, 4.0), 200);
  const auto audit = check_boundary_assumption(f, r, l);
  std::size_t expect_l = 0, expect_0 = 0, expect_bad = 0;
  for (std::size_t idx : r.boundary_cells()) {
    const Vector c = r.grid.center(idx);
    const double x = c[0], y = c[1];
    const double gx = x * x + y * y, gy = 2 * x * y;
    const double s0 = 2 * x * (std::pow(x, 4) + 10 * x * x * y * y + 5 * std::pow(y, 4));
    const double sl = s0 + l[0] * (2 * x * gx + 2 * y * gy) + l[1] * (2 * y * gx + 2 * x * gy);
    expect_l += sl < -1e-12;
    expect_0 += s0 < -1e-12;
    expect_bad += sl < -1e-12 && !(s0 < -1e-12);
  }
  EXPECT_EQ(audit.exit_cells_l, expect_l);
  EXPECT_EQ(audit.exit_cells_0, expect_0);
  EXPECT_EQ(audit.counterexamples.size(), expect_bad);
  EXPECT_EQ(audit.holds, expect_bad == 0);
}

TEST(HalfSpace, Examples) {
  const auto cone = cubic_cone().objective;
  const auto rc = theta_region(cone, {0.0, 0.0}, 3.0, cube(2, -4.0, 4.0), 200);
  EXPECT_TRUE(halfspace_check(cone, rc, {1.0, 0.0}));
  const auto bowl = quadratic_bowl().objective;
  const auto rb = theta_region(bowl, {0.0, 0.0}, 1.0, cube(2, -2.0, 2.0), 100);
  EXPECT_FALSE(halfspace_check(bowl, rb, {1.0, 0.0}));
  EXPECT_FALSE(halfspace_check(bowl, rb, {0.6, -0.8}));
  const auto valley = cubic_valley().objective;
  const auto rv = theta_region(valley, {0.0, 0.0}, 1.0, cube(2, -2.0, 2.0), 400);
  EXPECT_TRUE(halfspace_check(valley, rv, {1.0, 0.0}));
  EXPECT_THROW(halfspace_check(valley, rv, {1.0, 1.0}), ConfigError);
}
