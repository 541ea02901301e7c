#include <gtest/gtest.h>

#include <cmath>

#include "../support/oracles.hpp"
#include "epsbeta/epsbeta.hpp"

using namespace epsbeta;

TEST(AdjacencyChain, SingleChamberGoesStraightOut) {
  EXPECT_EQ(adjacency_chain(fixtures::disk_cells(), 1), (std::vector<int>{1, 0}));
}

TEST(AdjacencyChain, NestedAnnuliWalkOutward) {
  const GridCluster E = fixtures::nested_annuli();
  EXPECT_EQ(adjacency_chain(E, 1), (std::vector<int>{1, 2, 3, 0}));
  EXPECT_EQ(adjacency_chain(E, 2), (std::vector<int>{2, 3, 0}));
  EXPECT_EQ(adjacency_chain(E, 3), (std::vector<int>{3, 0}));
}

TEST(AdjacencyChain, EmptyChamberIsDisconnected) {
  GridCluster g(2, Index3{8, 8, 1}, 1.0 / 8, Point{}, 2);
  g.set_label(Index3{3, 3, 0}, 1);
  EXPECT_TRUE(adjacency_chain(g, 2).empty());
  try {
    adjust_single_chamber(g, constant_density(), 2, 1e-6);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DisconnectedChamber);
  }
}

TEST(AdjustSingleChamber, OneChamberReducesToOneTransfer) {
  const GridCluster E = fixtures::disk_cells();
  const auto [F, rep] = adjust_single_chamber(E, constant_density(), 1, 1e-8);
  EXPECT_EQ(rep.transfers.size(), 1u);
  EXPECT_EQ(rep.balls.size(), 1u);
  EXPECT_NEAR(rep.after.volume(1) - rep.before.volume(1), 1e-8, 1e-10 * rep.before.volume(1));
  EXPECT_TRUE(rep.bound_holds);
}

TEST(AdjustSingleChamber, InnermostChainLeavesMiddleVolumesAlone) {
  const GridCluster E = fixtures::nested_annuli();
  const DensityField g = constant_density();
  const auto before = oracle::volumes(E, g);
  const auto [F, rep] = adjust_single_chamber(E, g, 1, -2e-8);
  EXPECT_EQ(rep.transfers.size(), 3u);
  const auto after = oracle::volumes(F, g);
  EXPECT_NEAR(after[0] - before[0], -2e-8, 1e-9 * before[0]);
  EXPECT_EQ(after[1], before[1]);
  EXPECT_EQ(after[2], before[2]);
  // Balls are pairwise disjoint.
  for (std::size_t a = 0; a < rep.balls.size(); ++a)
    for (std::size_t b = a + 1; b < rep.balls.size(); ++b)
      EXPECT_GT(distance(rep.balls[a].center, rep.balls[b].center),
                rep.balls[a].radius + rep.balls[b].radius);
}

TEST(AdjustSingleChamber, ZeroEpsilonIsIdentity) {
  const GridCluster E = fixtures::nested_annuli();
  const auto [F, rep] = adjust_single_chamber(E, constant_density(), 2, 0.0);
  EXPECT_TRUE(F == E);
  EXPECT_EQ(rep.increment, 0.0);
}

TEST(AdjustSingleChamber, ComposesIntoAVolumeVector) {
  GridCluster E = fixtures::nested_annuli();
  const DensityField g = constant_density();
  const auto start = oracle::volumes(E, g);
  const std::vector<double> eps = {1e-8, -3e-8, 2e-8};
  SurgeryOptions opts;
  for (int h = 1; h <= 3; ++h) {
    auto [F, rep] = adjust_single_chamber(E, g, h, eps[h - 1], std::nullopt, opts);
    for (const Ball& b : rep.balls) opts.forbidden.push_back(b);
    E = std::move(F);
  }
  const auto end = oracle::volumes(E, g);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(end[k] - start[k], eps[k], 1e-9 * start[k]);
}

TEST(AdjustSingleChamber, ExcludedBallIsAvoided) {
  const GridCluster E = fixtures::disk_cells();
  const auto [F0, first] = adjust_single_chamber(E, constant_density(), 1, 1e-8);
  const Ball keep = first.balls.front();
  const auto [F, rep] = adjust_single_chamber(E, constant_density(), 1, 1e-8, keep);
  for (const Ball& b : rep.balls)
    EXPECT_GT(distance(b.center, keep.center), b.radius + keep.radius);
  const auto changed = oracle::changed_cells(E, F);
  for (std::size_t k : changed) EXPECT_GT(distance(E.cell_center(E.unravel(k)), keep.center), keep.radius);
}

TEST(AdjustInBall, FlatSplitMovesTheCap) {
  const GridCluster V = fixtures::vertical_interface();
  const DensityField g = constant_density();
  const Ball b{{0.5, 0.5, 0}, 0.25};
  for (double eps : {1e-3, -1e-3, 1e-4}) {
    const auto [F, rep] = adjust_in_ball(V, g, 1, 2, b, eps);
    EXPECT_NEAR(rep.after.volume(1) - rep.before.volume(1), eps, 1e-12);
    EXPECT_TRUE(rep.confined);
    const auto changed = oracle::changed_cells(V, F);
    EXPECT_TRUE(oracle::confined_to(V, changed, b.center, b.radius));
    // Lateral walls only: two walls of height delta.
    EXPECT_NEAR(rep.increment, 2 * rep.delta, 1e-12);
    // A constant density is Lipschitz, so the exponent is beta(1, 2) = 1.
    EXPECT_DOUBLE_EQ(rep.beta, beta_exponent(1.0, 2));
    EXPECT_NEAR(rep.ratio, rep.increment / std::pow(std::abs(eps), rep.beta), 1e-9 * rep.ratio);
  }
}

TEST(AdjustInBall, SymmetrisedWeightCollapsesOnAxisNormals) {
  const GridCluster V = fixtures::vertical_interface();
  const Ball b{{0.5, 0.5, 0}, 0.25};
  const auto [F1, r1] = adjust_in_ball(V, constant_density(), 1, 2, b, 5e-4);
  const auto [F2, r2] = adjust_in_ball(V, direction_weighted(0.5, Point{1, 0, 0}), 1, 2, b, 5e-4);
  EXPECT_NEAR(r1.increment, r2.increment, 1e-12);
  EXPECT_TRUE(F1 == F2);
}

TEST(AdjustInBall, ThirdChamberInTheBallIsRejected) {
  GridCluster V = fixtures::vertical_interface();
  V = GridCluster(2, V.shape(), V.spacing(), V.origin(), 3);
  const GridCluster src = fixtures::vertical_interface();
  for (std::size_t k = 0; k < src.cell_count(); ++k) V.mutable_labels()[k] = src.label(k);
  V.set_label(Index3{30, 30, 0}, 3);
  try {
    adjust_in_ball(V, constant_density(), 1, 2, Ball{{0.5, 0.5, 0}, 0.25}, 1e-4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BallNotBiphase);
  }
}
