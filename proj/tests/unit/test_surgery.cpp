#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "epsbeta/epsbeta.hpp"

using namespace epsbeta;

namespace {

GridCluster grid(int n, int m) { return GridCluster(2, Index3{n, n, 1}, 1.0 / n, Point{}, m); }

// Chamber 1 below y = 1/2, exterior above, on a 64 x 64 unit grid.
GridCluster lower_half(int n = 64) {
  GridCluster g = grid(n, 2);
  for (int y = 0; y < n / 2; ++y)
    for (int x = 0; x < n; ++x) g.set_label(Index3{x, y, 0}, 1);
  return g;
}

const Point kMid{0.5, 0.5, 0.0};

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Constants, TransferConstant) {
  EXPECT_EQ(transfer_constant(2, 1.0), 70.0);
  EXPECT_EQ(transfer_constant(3, 1.0), 198.0);
  EXPECT_EQ(transfer_constant(2, 2.0), 262.0);
}

TEST(Constants, OmegaHatFallback) {
  EXPECT_NEAR(omega_hat(0.0, 0.7, 2, 1.0), 1e-4, 1e-18);
  EXPECT_EQ(omega_hat(0.3, 0.7, 2, 1.0), 0.3);
}

TEST(OrientPair, StackedHalvesBothOnTheGridEdge) {
  GridCluster g = grid(8, 2);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) g.set_label(Index3{x, y, 0}, y < 4 ? 1 : 2);
  EXPECT_EQ(code_of([&] { orient_pair(g, 1, 2); }), ErrorCode::ConditionViolated);
}

TEST(OrientPair, SwapsWhenOnlyTheSecondIsEnclosed) {
  GridCluster g = grid(8, 2);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) g.set_label(Index3{x, y, 0}, x > 1 && x < 6 && y > 1 && y < 6 ? 2 : 1);
  const InterfacePoint ip = orient_pair(g, 1, 2);
  EXPECT_TRUE(ip.swapped);
  EXPECT_EQ(ip.i, 2);
  EXPECT_EQ(ip.j, 1);
  EXPECT_FALSE(orient_pair(g, 2, 1).swapped);
}

TEST(OrientPair, ExteriorFirstIsAcceptedAsGiven) {
  const InterfacePoint ip = orient_pair(fixtures::nested_annuli(), 0, 3);
  EXPECT_FALSE(ip.swapped);
  EXPECT_EQ(ip.i, 0);
}

TEST(OrientPair, NoContactIsEmptyInterface) {
  EXPECT_EQ(code_of([] { orient_pair(fixtures::nested_annuli(), 1, 3); }), ErrorCode::EmptyInterface);
}

TEST(Flatness, ExactFlatInterface) {
  const GridCluster g = lower_half();
  const FlatnessStats s = flatness_stats(g, kMid, 1, 0, 16.0 / 64, 0.1);
  EXPECT_EQ(s.interface_density_i, 1.0);
  EXPECT_EQ(s.interface_density_j, 1.0);
  EXPECT_EQ(s.slab_excess, 0.0);
  EXPECT_EQ(s.misvolume, 0.0);
  EXPECT_TRUE(s.pass());
}

TEST(Flatness, OneCellBumpIsOneCellOfMisvolume) {
  GridCluster g = lower_half();
  g.set_label(Index3{34, 32, 0}, 1);
  const double h = 1.0 / 64;
  const double a = 16 * h;
  const FlatnessStats s = flatness_stats(g, kMid, 1, 0, a, 0.1);
  EXPECT_DOUBLE_EQ(s.misvolume, h * h);
  // h^2 against rho^3 a^2 = 0.256 h^2.
  EXPECT_FALSE(s.pass());
  const FlatnessStats loose = flatness_stats(g, kMid, 1, 0, a, 0.5);
  EXPECT_DOUBLE_EQ(loose.misvolume, h * h);
  EXPECT_LT(h * h, 0.125 * a * a);
}

TEST(Flatness, ForeignCellBoundary) {
  GridCluster g = lower_half();
  g.set_label(Index3{30, 28, 0}, 2);
  const FlatnessStats s = flatness_stats(g, kMid, 1, 0, 16.0 / 64, 0.1);
  ASSERT_TRUE(s.foreign_boundary.count(2));
  EXPECT_DOUBLE_EQ(s.foreign_boundary.at(2), 4.0 / 64);
}

TEST(GoodSet, FlatInterfaceKeepsEveryColumn) {
  const GoodSetReport r = good_set(lower_half(), kMid, 1, 0, 16.0 / 64, 0.1);
  EXPECT_EQ(r.columns.size(), r.total_columns);
  EXPECT_EQ(r.bad_measure, 0.0);
}

TEST(GoodSet, ForeignCellRemovesItsColumn) {
  GridCluster g = lower_half();
  g.set_label(Index3{30, 28, 0}, 2);
  const GoodSetReport r = good_set(g, kMid, 1, 0, 16.0 / 64, 0.1);
  EXPECT_EQ(r.columns.size() + 1, r.total_columns);
  EXPECT_DOUBLE_EQ(r.bad_measure, 1.0 / 64);
}

TEST(GoodSet, TallSpikeRemovesItsColumn) {
  GridCluster g = lower_half();
  // a rho = 1.6 cells; three cells clears it by more than one cell.
  for (int y = 32; y < 35; ++y) g.set_label(Index3{30, y, 0}, 1);
  const GoodSetReport r = good_set(g, kMid, 1, 0, 16.0 / 64, 0.1);
  EXPECT_EQ(r.columns.size() + 1, r.total_columns);
}

class FlatTransfer : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    E = new GridCluster(fixtures::flat_interface());
    plan = new SurgeryPlan(plan_surgery(*E, constant_density(), 1, 0));
  }
  static void TearDownTestSuite() {
    delete E;
    delete plan;
  }
  static GridCluster* E;
  static SurgeryPlan* plan;
};
GridCluster* FlatTransfer::E = nullptr;
SurgeryPlan* FlatTransfer::plan = nullptr;

TEST_F(FlatTransfer, PlanIsOrientedAndInsideTheGrid) {
  EXPECT_TRUE(plan->swapped);  // chamber 1 meets the exterior
  EXPECT_EQ(plan->i, 0);
  EXPECT_EQ(plan->j, 1);
  EXPECT_GT(plan->eps_bar, 0.0);
  EXPECT_EQ(plan->K_required, 1.0);
  for (const Check& c : plan->flatness.checks) EXPECT_TRUE(c.holds) << c.name;
}

TEST_F(FlatTransfer, ZeroEpsilonIsIdentity) {
  const TransferResult r = transfer_volume(*E, constant_density(), *plan, 0.0);
  EXPECT_TRUE(r.cluster == *E);
  const TransferBound b = verify_transfer_bound(*E, r, constant_density());
  EXPECT_EQ(b.increment, 0.0);
  EXPECT_TRUE(b.holds);
}

TEST_F(FlatTransfer, DeltaIsEpsilonOverEll) {
  for (double f : {1.0, 0.3, -0.5, 0.01}) {
    const double eps = f * plan->eps_bar;
    const TransferResult r = transfer_volume(*E, constant_density(), *plan, eps);
    // Pure translation of a flat interface adds a slab of volume delta * ell.
    EXPECT_NEAR(r.plan.delta, std::abs(eps) / r.plan.ell, 1e-12 * r.plan.delta);
    EXPECT_NEAR(r.plan.delta_bar, 2.0 * plan->M * std::abs(eps) / r.plan.ell, 1e-15);
    EXPECT_GT(r.plan.delta, r.plan.delta_bar / 4);
    EXPECT_LT(r.plan.delta, r.plan.delta_bar);
  }
}

TEST_F(FlatTransfer, IncrementIsTheLateralWallsOnly) {
  const double eps = 0.5 * plan->eps_bar;
  const TransferResult r = transfer_volume(*E, constant_density(), *plan, eps);
  const TransferBound b = verify_transfer_bound(*E, r, constant_density());
  const double inc = oracle::raster_perimeter(r.cluster, constant_density()) -
                     oracle::raster_perimeter(*E, constant_density());
  EXPECT_GE(inc, 0.0);
  double walls = 0.0;
  for (const TermReport& t : b.terms) {
    if (t.name == "lateral_walls") walls = t.measured;
    else EXPECT_NEAR(t.measured, 0.0, 1e-15) << t.name;
  }
  EXPECT_NEAR(b.increment, walls, 1e-15);
  // Two walls of height delta; bound 2^{N+2} (N-1) ell^{N-2} delta = 16 delta.
  EXPECT_NEAR(b.increment, 2 * r.plan.delta, 1e-12);
  EXPECT_LE(b.increment, 16 * r.plan.delta);
  EXPECT_EQ(b.outside_residual, 0.0);
}

TEST_F(FlatTransfer, HLowerBound) {
  const TransferResult r = transfer_volume(*E, constant_density(), *plan, 0.2 * plan->eps_bar);
  EXPECT_GE(r.plan.H, plan->a / (8 * r.plan.ell) - 1e-12);
  EXPECT_GE(r.plan.H, 1);
}

TEST_F(FlatTransfer, RejectsEpsilonAboveEpsBar) {
  EXPECT_EQ(code_of([&] { transfer_volume(*E, constant_density(), *plan, 1.01 * plan->eps_bar); }),
            ErrorCode::EpsilonTooLarge);
}

TEST_F(FlatTransfer, DeltaGrowsWithEpsilon) {
  double prev = 0.0;
  int prev_n = 0;
  for (double f : {0.05, 0.1, 0.2, 0.4, 0.8}) {
    const TransferResult r = transfer_volume(*E, constant_density(), *plan, f * plan->eps_bar);
    if (r.plan.n_ell == prev_n) {
      EXPECT_GT(r.plan.delta, prev);
    }
    prev = r.plan.delta;
    prev_n = r.plan.n_ell;
  }
}

TEST(Transfer, AntisymmetricInThePair) {
  // Neither chamber 1 nor 2 meets the exterior, so both orders are valid
  // without a swap.
  const GridCluster E = fixtures::nested_annuli();
  const DensityField g = constant_density();
  const SurgeryPlan a = plan_surgery(E, g, 1, 2);
  const SurgeryPlan b = plan_surgery(E, g, 2, 1);
  ASSERT_FALSE(a.swapped);
  ASSERT_FALSE(b.swapped);
  const double eps = 0.4 * std::min(a.eps_bar, b.eps_bar);
  const TransferResult ra = transfer_volume(E, g, a, eps);
  const TransferResult rb = transfer_volume(E, g, b, -eps);
  for (int k = 1; k <= 3; ++k)
    EXPECT_NEAR(ra.after.volume(k), rb.after.volume(k), 1e-12 * ra.after.volume(k));
  EXPECT_NEAR(ra.after.volume(1) - ra.before.volume(1), eps, 1e-12 * ra.before.volume(1));
}

TEST(Transfer, ThreeDimensionalFlatInterface) {
  const GridCluster E = fixtures::flat_interface_3d(32);
  const DensityField g = constant_density();
  const SurgeryPlan p = plan_surgery(E, g, 1, 0);
  for (double f : {0.7, -0.7}) {
    const double eps = f * p.eps_bar;
    const TransferResult r = transfer_volume(E, g, p, eps);
    const double want = p.i == 1 ? eps : -eps;
    const auto before = oracle::volumes(E, g);
    const auto after = oracle::volumes(r.cluster, g);
    EXPECT_NEAR(after[0] - before[0], want, 1e-10 * before[0]);
    const TransferBound b = verify_transfer_bound(E, r, g);
    EXPECT_TRUE(b.holds);
    EXPECT_LE(b.increment, p.K_required * std::pow(std::abs(eps), 2.0 / 3.0));
  }
}

TEST(Transfer, ForeignChamberVolumesAreUntouched) {
  const GridCluster E = fixtures::flat_interface();
  const DensityField g = radial_holder(Point{0.5, 0.5, 0}, 1.0, 0.5, 1.0);
  const SurgeryPlan p = plan_surgery(E, g, 1, 0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-p.eps_bar, p.eps_bar);
  const auto before = oracle::volumes(E, g);
  for (int k = 0; k < 5; ++k) {
    const TransferResult r = transfer_volume(E, g, p, u(rng));
    EXPECT_EQ(oracle::volumes(r.cluster, g)[1], before[1]);
  }
}

TEST(Transfer, CrowdedInterfaceFailsWithNamedError) {
  // A checkerboard has no flat stretch anywhere.
  GridCluster g = grid(32, 2);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) g.set_label(Index3{x, y, 0}, (x + y) % 2 ? 1 : 2);
  const ErrorCode c = code_of([&] { plan_surgery(g, constant_density(), 1, 2); });
  EXPECT_TRUE(c == ErrorCode::FlatnessFailure || c == ErrorCode::ConditionViolated ||
              c == ErrorCode::NoCandidateCube);
}
