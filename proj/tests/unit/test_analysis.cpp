#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "epsbeta/epsbeta.hpp"

using namespace epsbeta;

TEST(RequiredK, FallbackOmegaHat) {
  const RequiredK r = required_K(0.0, 1.0, 2, 0.7);
  EXPECT_TRUE(r.fallback);
  EXPECT_NEAR(r.omega_hat, 0.49 / 4900.0, 1e-18);
  EXPECT_NEAR(r.K, 0.7, 1e-15);
}

TEST(RequiredK, PositiveOmega) {
  const RequiredK r = required_K(0.001, 1.0, 2);
  EXPECT_FALSE(r.fallback);
  EXPECT_NEAR(r.K, 70 * std::sqrt(0.001), 1e-12);
  EXPECT_NEAR(r.K, 2.2136, 1e-4);
}

TEST(RequiredK, ThreeDimensionalConstant) { EXPECT_EQ(required_K(0.01, 1.0, 3).C, 198.0); }

TEST(RequiredK, NondecreasingInOmegaAndM) {
  double prev = 0.0;
  for (double w = 1e-6; w < 1; w *= 3) {
    const double k = required_K(w, 1.5, 2).K;
    EXPECT_GE(k, prev);
    prev = k;
  }
  prev = 0.0;
  for (double M = 1; M < 5; M += 0.25) {
    const double k = required_K(0.01, M, 3).K;
    EXPECT_GE(k, prev);
    prev = k;
  }
}

TEST(RequiredK, FromAField) {
  const RequiredK r = required_K(constant_density(), Point{0.5, 0.5, 0}, 2, 1);
  EXPECT_EQ(r.M, 1.0);
  EXPECT_TRUE(r.fallback);
}

TEST(Cper, ConstantDensityFallsBack) {
  CperOptions o;
  o.samples = 4;
  const CperCurve c = cper_sweep(fixtures::flat_interface(), constant_density(), {1e-3, 1e-5}, o);
  for (double w : c.omega_curve) EXPECT_EQ(w, 0.0);
  EXPECT_TRUE(std::isinf(c.fit_ratio));
  EXPECT_FALSE(c.note.empty());
  for (double v : c.C_values) {
    EXPECT_GE(v, 0.0);
    // Increment of the fallback plan is below K = 1 times |eps|^{1/2}.
    EXPECT_LE(v, 1.0);
  }
}

TEST(Cper, OmegaCurveHalvingFactor) {
  // omega(t) = t gives omega(t^{1/2})^{1/2} = t^{1/4}; halving t scales it by 2^{-1/4}.
  const DensityField g = affine_clamped(1.0, Point{}, 1.5, Point{0, 0.5, 0}, 1.0, 2.0);
  CperOptions o;
  o.samples = 2;
  const CperCurve c = cper_sweep(fixtures::flat_interface(), g, {2e-4, 1e-4}, o);
  EXPECT_NEAR(c.omega_curve[1] / c.omega_curve[0], std::pow(0.5, 0.25), 1e-9);
  EXPECT_TRUE(std::isfinite(c.fit_ratio));
}

TEST(Cper, DecreasesWithT) {
  const DensityField g = affine_clamped(1.0, Point{}, 1.5, Point{0, 0.5, 0}, 1.0, 2.0);
  CperOptions o;
  o.samples = 6;
  const CperCurve c = cper_sweep(fixtures::flat_interface(), g, {1e-2, 1e-4, 1e-6}, o);
  EXPECT_GT(c.C_values[0], c.C_values[1]);
  EXPECT_GT(c.C_values[1], c.C_values[2]);
}

TEST(Boundedness, DiskVanishesBeyondItsRadius) {
  const GridCluster D = fixtures::unit_disk();
  std::vector<double> ts;
  for (int k = 0; k <= 60; ++k) ts.push_back(k * 0.025);
  const TruncationTrace tr = boundedness_check(D, constant_density(), 1.0, ts, Point{}, false);
  EXPECT_EQ(tr.verdict, "BOUNDED");
  EXPECT_TRUE(tr.nonincreasing);
  for (std::size_t k = 0; k < ts.size(); ++k) {
    EXPECT_GE(tr.v_values[k], 0.0);
    if (ts[k] >= 1.0) {
      EXPECT_EQ(tr.v_values[k], 0.0);
    }
    if (k > 0) {
      EXPECT_LE(tr.v_values[k], tr.v_values[k - 1]);
    }
  }
  EXPECT_NEAR(tr.v_values[20], 0.75 * std::numbers::pi, 0.01 * 0.75 * std::numbers::pi);
}

TEST(Boundedness, FullGridIsUnboundedWithinGrid) {
  GridCluster g(2, Index3{16, 16, 1}, 1.0 / 16, Point{}, 1);
  for (std::size_t k = 0; k < g.cell_count(); ++k) g.mutable_labels()[k] = 1;
  const TruncationTrace tr =
      boundedness_check(g, constant_density(), 1.0, {0.0, 0.25, 0.5, 0.7}, Point{}, false);
  EXPECT_EQ(tr.verdict, "UNBOUNDED-WITHIN-GRID");
  EXPECT_GT(tr.v_values.back(), 0.0);
}

TEST(Boundedness, CentredDifferences) {
  const GridCluster D = fixtures::unit_disk(150);
  const std::vector<double> ts = {0.2, 0.4, 0.6};
  const TruncationTrace tr = boundedness_check(D, constant_density(), 0.5, ts, Point{}, true);
  EXPECT_DOUBLE_EQ(tr.derivative[1], std::abs(tr.v_values[2] - tr.v_values[0]) / 0.4);
  EXPECT_DOUBLE_EQ(tr.derivative[0], std::abs(tr.v_values[1] - tr.v_values[0]) / 0.2);
  EXPECT_DOUBLE_EQ(tr.differential_margin[1], tr.derivative[1] - 0.5 * std::sqrt(tr.v_values[1]));
  ASSERT_EQ(tr.perimeter_inside.size(), 3u);
  // Splitting the disk adds the cut circle to both pieces.
  const double whole = measure(D, constant_density()).perimeter;
  EXPECT_GT(tr.perimeter_inside[1] + tr.perimeter_outside[1], whole);
}
