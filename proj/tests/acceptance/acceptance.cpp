// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "../support/oracles.hpp"
#include "epsbeta/epsbeta.hpp"

using namespace epsbeta;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int failures = 0;

void run(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = Outcome{false, std::string("unexpected error: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = s < limit_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::printf("%s  %2d  %s: %s [%.2f s of %.0f s%s]\n", pass ? "PASS" : "FAIL", id, name,
              o.detail.c_str(), s, limit_s, in_time ? "" : ", over time");
  std::fflush(stdout);
}

// Chamber that receives +eps under the plan, with the sign of the change it sees.
std::pair<int, double> tracked(const SurgeryPlan& p, double eps) {
  return p.i != 0 ? std::pair{p.i, eps} : std::pair{p.j, -eps};
}

Outcome exponent_table() {
  bool ok = true;
  double worst = 0.0;
  for (int N : {2, 3, 4}) {
    ok = ok && beta_exponent(0.0, N) == (N - 1.0) / N && beta_exponent(1.0, N) == 1.0;
    double prev = -1.0;
    for (int k = 0; k <= 100; ++k) {
      const double b = beta_exponent(k / 100.0, N);
      if (b < prev) {
        ok = false;
        worst = std::max(worst, prev - b);
      }
      prev = b;
    }
  }
  ok = ok && std::abs(beta_exponent(0.5, 2) - 2.0 / 3.0) <= 1e-15;
  return {ok, ok ? "endpoints exact, monotone on 101 points for N = 2, 3, 4"
                 : "violation, worst drop " + fmt("%.3g", worst)};
}

Outcome perimeter_formula() {
  // Symmetric in nu, varying in x.
  DensityField g = constant_density();
  g.g = [](const Point& x, const Point& nu) {
    return 1.0 + 0.3 * nu[0] * nu[0] + 0.2 * std::sin(3.0 * x[0]) * std::sin(3.0 * x[0]) + 0.1 * x[1];
  };
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const GridCluster E = fixtures::random_two_chamber(seed, 64);
    const MeasureReport r = measure(E, g);
    const double direct = oracle::symmetric_facet_sum(E, g);
    worst = std::max(worst, std::abs(r.perimeter - direct) / direct);
  }
  const double seven = measure(fixtures::two_squares(), constant_density()).perimeter;
  const bool ok = worst <= 1e-12 && seven == 7.0;
  return {ok, "worst relative gap " + fmt("%.2e", worst) + " over 20 clusters, two squares " +
                  fmt("%.17g", seven)};
}

struct Sweep {
  int trials = 0;
  int volume_fail = 0;
  int local_fail = 0;
  int others_fail = 0;
  int decreased = 0;
  double worst_volume = 0.0;
  int bound_fail = 0;
  double worst_ratio = 0.0;  // increment / bound
};

void sweep(const GridCluster& E, const DensityField& field, std::uint64_t seed, Sweep& out) {
  const SurgeryPlan plan = plan_surgery(E, field, 1, 0);
  const int N = E.dims();
  const std::vector<double> before = oracle::volumes(E, field);
  const double P0 = measure(E, field).perimeter;
  // Independent constant: C = 2^{N+3} N M^2 + 6, K = C omega_hat^{1/N}.
  const double C = std::pow(2.0, N + 3) * N * plan.M * plan.M + 6.0;
  const double K = C * std::pow(plan.omega_hat, 1.0 / N);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-plan.eps_bar, plan.eps_bar);
  for (int s = 0; s < 50; ++s) {
    const double eps = u(rng);
    ++out.trials;
    const TransferResult r = transfer_volume(E, field, plan, eps);
    if (r.perimeter_decreased) {
      ++out.decreased;
      continue;
    }
    const std::vector<double> after = oracle::volumes(r.cluster, field);
    const auto [ch, want] = tracked(plan, eps);
    const double err = std::abs(after[ch - 1] - before[ch - 1] - want) / before[ch - 1];
    out.worst_volume = std::max(out.worst_volume, err);
    if (!(err <= 1e-10)) ++out.volume_fail;
    for (int k = 1; k <= E.m(); ++k)
      if (k != ch && after[k - 1] != before[k - 1]) ++out.others_fail;
    const auto changed = oracle::changed_cells(E, r.cluster);
    if (!oracle::confined_to(E, changed, plan.x_bar, plan.a * std::sqrt(N) / 2.0)) ++out.local_fail;
    const double inc = measure(r.cluster, field).perimeter - P0;
    const double bound = K * std::pow(std::abs(eps), (N - 1.0) / N);
    if (inc > bound) ++out.bound_fail;
    if (bound > 0) out.worst_ratio = std::max(out.worst_ratio, inc / bound);
  }
}

Outcome transfer_exactness() {
  Sweep s;
  sweep(fixtures::flat_interface(), constant_density(), 101, s);
  sweep(fixtures::disk_cells(), constant_density(), 102, s);
  const bool ok = s.trials == 100 && s.decreased == 0 && s.volume_fail == 0 && s.local_fail == 0 &&
                  s.others_fail == 0;
  std::ostringstream d;
  d << s.trials << " transfers, worst volume error " << fmt("%.2e", s.worst_volume)
    << " relative, " << s.volume_fail << " over 1e-10, " << s.local_fail << " outside the ball, "
    << s.others_fail << " foreign volume changes, " << s.decreased << " degenerate";
  return {ok, d.str()};
}

Outcome perimeter_bound() {
  Sweep s;
  const DensityField radial = radial_holder(Point{0.5, 0.5, 0.0}, 1.0, 0.5, 1.0);
  sweep(fixtures::flat_interface(), constant_density(), 101, s);
  sweep(fixtures::disk_cells(), constant_density(), 102, s);
  sweep(fixtures::flat_interface(), radial, 101, s);
  sweep(fixtures::disk_cells(), radial, 102, s);

  // Scaling of the increment over two decades of epsilon on the flat fixture.
  const GridCluster E = fixtures::flat_interface();
  const DensityField g1 = constant_density();
  const SurgeryPlan plan = plan_surgery(E, g1, 1, 0);
  const double P0 = measure(E, g1).perimeter;
  std::vector<double> lx, ly;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int k = 0; k <= 8; ++k) {
    const double eps = plan.eps_bar * std::pow(10.0, -k / 4.0);
    const TransferResult r = transfer_volume(E, g1, plan, eps);
    const double inc = measure(r.cluster, g1).perimeter - P0;
    lx.push_back(std::log(eps));
    ly.push_back(std::log(inc));
    const double c = inc / std::sqrt(eps);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  const double slope = oracle::least_squares_slope(lx, ly);
  const bool ok = s.trials == 200 && s.decreased == 0 && s.bound_fail == 0 && slope >= 0.4 &&
                  slope <= 0.6 && hi <= 2.0 * lo;
  std::ostringstream d;
  d << s.bound_fail << " violations in " << s.trials << " trials (max increment/bound "
    << fmt("%.3g", s.worst_ratio) << "), log-log slope " << fmt("%.3f", slope)
    << ", increment/|eps|^(1/2) spread " << fmt("%.3f", hi / lo);
  return {ok, d.str()};
}

Outcome small_constant() {
  // g = 1.5 + y / 2 on the unit square. Its oscillation over a ball of radius
  // t is t, so omega(t) = t.
  const DensityField g = affine_clamped(1.0, Point{0, 0, 0}, 1.5, Point{0, 0.5, 0}, 1.0, 2.0);
  const std::vector<double> ts = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  CperOptions o;
  o.samples = 32;
  o.seed = 7;
  const CperCurve c = cper_sweep(fixtures::flat_interface(), g, ts, o);
  // Reference omega(t^{1/2})^{1/2} = t^{1/4} for the linear modulus.
  double worst_ref = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k)
    worst_ref = std::max(worst_ref, std::abs(c.omega_curve[k] / std::pow(ts[k], 0.25) - 1.0));
  int ok_samples = 0;
  for (int n : c.successes) ok_samples += n;
  const bool ok = c.C_values.back() < 0.5 * c.C_values.front() && std::isfinite(c.fit_ratio) &&
                  c.C_values.back() > 0.0 && worst_ref <= 0.1;
  std::ostringstream d;
  d << "C_per " << fmt("%.4g", c.C_values.front()) << " at t = 1e-2, "
    << fmt("%.4g", c.C_values.back()) << " at t = 1e-6, fit ratio " << fmt("%.3g", c.fit_ratio)
    << ", omega reference gap " << fmt("%.2e", worst_ref) << ", " << ok_samples << "/"
    << 32 * ts.size() << " samples ran";
  return {ok, d.str()};
}

Outcome composition() {
  const GridCluster E = fixtures::nested_annuli();
  const DensityField g1 = constant_density();
  const std::vector<double> before = oracle::volumes(E, g1);
  const double P0 = measure(E, g1).perimeter;
  const int m = E.m();
  int runs = 0, vol_fail = 0, other_fail = 0, ball_fail = 0, bound_fail = 0;
  double worst = 0.0;
  for (int h = 1; h <= m; ++h)
    for (double eps : {1e-8, -1e-8, 3e-9}) {
      const auto [F, rep] = adjust_single_chamber(E, g1, h, eps);
      ++runs;
      const std::vector<double> after = oracle::volumes(F, g1);
      const double err = std::abs(after[h - 1] - before[h - 1] - eps) / before[h - 1];
      worst = std::max(worst, err);
      if (!(err <= 1e-9)) ++vol_fail;
      for (int k = 1; k <= m; ++k)
        if (k != h && after[k - 1] != before[k - 1]) ++other_fail;
      if (static_cast<int>(rep.balls.size()) > m * (m + 1) / 2) ++ball_fail;
      // g = 1 has omega = 0, so every pairwise K0 is the user constant 1.
      const double inc = measure(F, g1).perimeter - P0;
      if (inc > m * 1.0 * std::sqrt(std::abs(eps))) ++bound_fail;
    }
  const bool ok = runs == 9 && vol_fail == 0 && other_fail == 0 && ball_fail == 0 && bound_fail == 0;
  std::ostringstream d;
  d << runs << " adjustments on 3 chambers, worst volume error " << fmt("%.2e", worst) << ", "
    << other_fail << " other-chamber changes, " << ball_fail << " over 6 balls, " << bound_fail
    << " over m K0 |eps|^(1/2)";
  return {ok, d.str()};
}

Outcome infiltration() {
  const DensityField g1 = constant_density();
  const Point x{0.5, 0.5, 0.0};
  const int N = 2;
  const double M = 1.0;
  const double wN = std::numbers::pi;
  const double base = N * std::pow(wN, 1.0 / N) / std::pow(2.0 * M, (N - 1.0) / N);
  const double C = std::min(base / (3.0 * M), base / (10.0 * M * M * M));
  int count = 0, fails = 0, searched = 0;
  std::string bad;
  for (const fixtures::Inclusion& inc : fixtures::inclusions()) {
    ++count;
    double r = 0.25;
    try {
      r = density_zero_radius(inc.cluster, x, 1, 2, 10.0 * std::pow(M, 4));
      ++searched;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoValidRadius) throw;
    }
    const auto [F, rep] = infiltrate(inc.cluster, g1, x, 1, 2, r);
    bool ok = true;
    for (std::size_t k = 0; k < F.cell_count(); ++k) {
      const bool inside = distance(F.cell_center(F.unravel(k)), x) <= r;
      const Label l = F.label(k);
      if (inside && l != 1 && l != 2) ok = false;
      if (!inside && F.label(k) != inc.cluster.label(k)) ok = false;
    }
    const double drop = measure(inc.cluster, g1).perimeter - measure(F, g1).perimeter;
    const double sdv = oracle::symmetric_difference(inc.cluster, F, g1);
    ok = ok && drop >= C * std::pow(sdv, (N - 1.0) / N);
    const double M2 = M * M;
    if (rep.case_taken == 1) ok = ok && rep.Gamma1_area > 2 * M2 * (rep.D_area + rep.Gamma2_area);
    else if (rep.case_taken == 2) ok = ok && rep.Gamma2_area > 2 * M2 * rep.D_area;
    else ok = false;
    if (!ok) {
      ++fails;
      bad += " " + inc.name;
    }
  }
  const bool ok = count == 10 && fails == 0;
  std::ostringstream d;
  d << count << " inclusion fixtures, " << fails << " failing" << bad << "; radius from the search on "
    << searched << ", fixed r = 0.25 on the rest (search smallness test fails), C = "
    << fmt("%.4f", C);
  return {ok, d.str()};
}

Outcome radius_search() {
  const Point x{0.5, 0.5, 0.0};
  int passed = 0;
  for (const char* name : {"cell_below", "cell_above", "cell_deep"}) {
    for (const fixtures::Inclusion& inc : fixtures::inclusions())
      if (inc.name == name && density_zero_radius(inc.cluster, x, 1, 2, 10.0) > 0) ++passed;
  }
  const double r_pure = density_zero_radius(fixtures::vertical_interface(), x, 1, 2, 10.0);
  if (r_pure > 0) ++passed;
  bool quadrant_rejected = false;
  try {
    density_zero_radius(fixtures::quadrant(), x, 1, 2, 10.0);
  } catch (const Error& e) {
    quadrant_rejected = e.code() == ErrorCode::NoValidRadius;
  }
  const bool ok = passed == 4 && quadrant_rejected;
  return {ok, std::to_string(passed) + "/4 density-zero fixtures pass (two-phase ball r = " +
                  fmt("%.4f", r_pure) + "), quadrant " +
                  (quadrant_rejected ? "NoValidRadius" : "accepted")};
}

Outcome boundedness() {
  const GridCluster D = fixtures::unit_disk();
  const double h = D.spacing();
  std::vector<double> ts;
  for (int k = 0; k <= 150; ++k) ts.push_back(k * 0.01);
  const TruncationTrace tr = boundedness_check(D, constant_density(), 1.0, ts, Point{0, 0, 0}, false);
  double first_zero = -1.0;
  bool mono = true;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    if (tr.v_values[k] == 0.0 && first_zero < 0) first_zero = ts[k];
    if (k > 0 && tr.v_values[k] > tr.v_values[k - 1]) mono = false;
  }
  const double want = 0.75 * std::numbers::pi;
  const double gap = std::abs(tr.v_values[50] - want) / want;
  const bool ok = first_zero >= 0 && std::abs(first_zero - 1.0) <= 2 * h + 1e-12 && mono &&
                  gap <= 0.01 && tr.verdict == "BOUNDED";
  return {ok, "v = 0 from t = " + fmt("%.3f", first_zero) + ", nonincreasing " + (mono ? "yes" : "no") +
                  ", v(0.5) off 0.75 pi by " + fmt("%.2e", gap) + ", verdict " + tr.verdict};
}

Outcome in_ball() {
  const GridCluster V = fixtures::vertical_interface();
  const DensityField g1 = constant_density();
  const DensityField gd = direction_weighted(0.5, Point{1, 0, 0});
  const DensityField gs = symmetrized(gd);
  const Ball b{{0.5, 0.5, 0.0}, 0.25};
  double worst = 0.0, worst_direct = 0.0;
  int runs = 0;
  for (double eps : {1e-3, -1e-3, 1e-4, -2e-4, 1e-5}) {
    const auto [F1, r1] = adjust_in_ball(V, g1, 1, 2, b, eps);
    const auto [F2, r2] = adjust_in_ball(V, gd, 1, 2, b, eps);
    worst = std::max(worst, std::abs(r1.increment - r2.increment));
    // Second route: difference of symmetrised perimeters of the raster results.
    const double d1 = measure(F1, g1).perimeter - measure(V, g1).perimeter;
    const double d2 = measure(F2, gs).perimeter - measure(V, gs).perimeter;
    worst_direct = std::max(worst_direct, std::abs(d1 - d2));
    ++runs;
  }
  const bool ok = worst <= 1e-12 && worst_direct <= 1e-12;
  return {ok, std::to_string(runs) + " epsilons, worst increment gap " + fmt("%.2e", worst) +
                  " (reported), " + fmt("%.2e", worst_direct) + " (remeasured)"};
}

}  // namespace

int main() {
  run(1, "exponent table", 1, exponent_table);
  run(2, "cluster perimeter formula", 5, perimeter_formula);
  run(3, "transfer exactness and locality", 30, transfer_exactness);
  run(4, "perimeter bound", 120, perimeter_bound);
  run(5, "small constant", 120, small_constant);
  run(6, "composition", 60, composition);
  run(7, "infiltration", 30, infiltration);
  run(8, "radius search", 30, radius_search);
  run(9, "boundedness", 30, boundedness);
  run(10, "in-ball symmetrisation", 30, in_ball);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
