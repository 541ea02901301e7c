#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "../support/oracles.hpp"
#include "epsbeta/epsbeta.hpp"

using namespace epsbeta;

namespace {

const Point kX{0.5, 0.5, 0.0};

// Chamber 1 sealed inside chamber 2, so the pair (1, 2) is admissible.
GridCluster sealed_block() {
  GridCluster g(2, Index3{64, 64, 1}, 1.0 / 64, Point{}, 3);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      g.set_label(Index3{x, y, 0}, x >= 8 && x < 56 && y >= 8 && y < 32 ? 1 : 2);
  return g;
}

const fixtures::Inclusion& inclusion(const std::string& name) {
  static const std::vector<fixtures::Inclusion> all = fixtures::inclusions();
  for (const auto& inc : all)
    if (inc.name == name) return inc;
  throw std::runtime_error("no fixture " + name);
}

}  // namespace

TEST(InfiltrationConstant, ClosedForm) {
  const double base = 2 * std::sqrt(std::numbers::pi) / std::sqrt(2.0);
  EXPECT_NEAR(infiltration_constant(2, 1.0), base / 10, 1e-15);
  // For M = 2 the second term is still the smaller one.
  const double b2 = 2 * std::sqrt(std::numbers::pi) / std::pow(4.0, 0.5);
  EXPECT_NEAR(infiltration_constant(2, 2.0), b2 / 80, 1e-15);
}

TEST(RadiusSearch, TwoPhaseBallTakesTheLargestRadius) {
  const RadiusSearch s = density_zero_radius_trace(fixtures::vertical_interface(), kX, 1, 2, 10.0);
  ASSERT_FALSE(s.levels.empty());
  EXPECT_TRUE(s.levels.front().small);
  EXPECT_EQ(s.radius, s.levels.front().passing_r);
  EXPECT_GT(s.radius, 0.25);
}

TEST(RadiusSearch, SingleForeignCellStillPasses) {
  for (const char* name : {"cell_below", "cell_above", "cell_deep"}) {
    const double r = density_zero_radius(inclusion(name).cluster, kX, 1, 2, 10.0);
    EXPECT_GT(r, 3.0 / 64) << name;
  }
}

TEST(RadiusSearch, QuadrantHasNoValidRadius) {
  try {
    density_zero_radius(fixtures::quadrant(), kX, 1, 2, 10.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoValidRadius);
  }
}

TEST(Infiltrate, BothChambersOnTheExteriorIsRejected) {
  try {
    infiltrate(fixtures::vertical_interface(), constant_density(), kX, 1, 2, 0.2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConditionViolated);
  }
}

TEST(Infiltrate, EmptyInfiltrationChangesNothing) {
  const GridCluster V = sealed_block();
  const auto [F, rep] = infiltrate(V, constant_density(), kX, 1, 2, 0.2);
  EXPECT_TRUE(rep.no_infiltration);
  EXPECT_TRUE(F == V);
  EXPECT_EQ(rep.perimeter_drop, 0.0);
}

TEST(Infiltrate, SingleCellExactArithmetic) {
  const GridCluster& E = inclusion("cell_below").cluster;
  const DensityField g = constant_density();
  const auto [F, rep] = infiltrate(E, g, kX, 1, 2, 0.25);
  const double h = 1.0 / 64;
  // The cell sits under the (1,2) interface: three faces on E_1, one on E_2.
  EXPECT_EQ(rep.D_area, 0.0);
  EXPECT_DOUBLE_EQ(rep.Gamma1_area, 3 * h);
  EXPECT_DOUBLE_EQ(rep.Gamma2_area, h);
  EXPECT_EQ(rep.case_taken, 1);
  EXPECT_EQ(F.label(Index3{32, 31, 0}), 1);
  // Four foreign faces vanish, one (1,2) face appears.
  const double drop = oracle::raster_perimeter(E, g) - oracle::raster_perimeter(F, g);
  EXPECT_NEAR(drop, 3 * h, 1e-15);
  EXPECT_NEAR(rep.perimeter_drop, drop, 1e-15);
  EXPECT_NEAR(rep.symmetric_difference_volume, 2 * h * h, 1e-18);
  EXPECT_GE(drop, infiltration_constant(2, 1.0) * std::sqrt(2 * h * h));
}

TEST(Infiltrate, EveryInclusionMeetsTheBound) {
  const DensityField g = constant_density();
  for (const auto& inc : fixtures::inclusions()) {
    double r = 0.25;
    try {
      r = density_zero_radius(inc.cluster, kX, 1, 2, 10.0);
    } catch (const Error&) {
    }
    const auto [F, rep] = infiltrate(inc.cluster, g, kX, 1, 2, r);
    EXPECT_TRUE(rep.ball_cleared) << inc.name;
    EXPECT_TRUE(rep.confined) << inc.name;
    EXPECT_TRUE(rep.drop_bound_holds) << inc.name;
    EXPECT_NEAR(rep.symmetric_difference_volume, oracle::symmetric_difference(inc.cluster, F, g),
                1e-15)
        << inc.name;
  }
}

TEST(Infiltrate, NewBoundaryLiesOnD) {
  // A face of I that is still a boundary face of F was either on D or on the
  // interface with the chamber that did not absorb I.
  const GridCluster& E = inclusion("block_2x2").cluster;
  const auto [F, rep] = infiltrate(E, constant_density(), kX, 1, 2, 0.25);
  ASSERT_NE(rep.case_taken, 0);
  const int other = rep.case_taken == 1 ? rep.j : rep.i;
  const double r = rep.radius;
  auto in_ball = [&](const Index3& c) { return distance(E.cell_center(c), kX) <= r; };
  for (std::size_t k : rep.mask) {
    const Index3 c = E.unravel(k);
    for (int d = 0; d < 2; ++d)
      for (int s : {-1, 1}) {
        Index3 n = c;
        n[d] += s;
        if (F.label(n) == F.label(c)) continue;
        const Label en = E.label(n);
        const bool was_d = !in_ball(n) || (en != 1 && en != 2);
        const bool was_other = in_ball(n) && en == other;
        EXPECT_TRUE(was_d || was_other);
      }
  }
}

TEST(Infiltrate, MassMovesIntoOneChamber) {
  const GridCluster& E = inclusion("slab_20x2").cluster;
  const DensityField g = constant_density();
  const auto [F, rep] = infiltrate(E, g, kX, 1, 2, 0.25);
  const auto a = oracle::volumes(E, g);
  const auto b = oracle::volumes(F, g);
  const int into = rep.case_taken == 1 ? 1 : 2;
  EXPECT_NEAR(b[into - 1] - a[into - 1], rep.infiltration_volume, 1e-15);
  EXPECT_NEAR(a[2] - b[2], rep.infiltration_volume, 1e-15);
}

TEST(Infiltrate, OverlayInTheBallIsRejected) {
  const GridCluster V = sealed_block();
  const Ball b{{0.5, 0.5, 0}, 0.2};
  const auto [F, rep] = adjust_in_ball(V, constant_density(), 1, 2, b, 3e-4);
  ASSERT_TRUE(F.has_overlays());
  try {
    infiltrate(F, constant_density(), kX, 1, 2, 0.2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}
