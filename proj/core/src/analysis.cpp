#include "epsbeta/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "epsbeta/measures.hpp"

namespace epsbeta {

RequiredK required_K(double omega_x, double M, int N, double K_user) {
  RequiredK r;
  r.M = M;
  r.omega_x = omega_x;
  r.C = transfer_constant(N, M);
  r.fallback = !(omega_x > 0.0);
  r.omega_hat = omega_hat(omega_x, K_user, N, M);
  r.K = r.C * std::pow(r.omega_hat, 1.0 / N);
  return r;
}

RequiredK required_K(const DensityField& field, const Point& x, int N, int m, double K_user,
                     int probes) {
  (void)m;
  const LocalBounds lb = local_bounds(field, x, probes, N);
  return required_K(lb.omega_limit, lb.M, N, K_user);
}

CperCurve cper_sweep(const GridCluster& cluster, const DensityField& field,
                     const std::vector<double>& t_grid, const CperOptions& options) {
  const int N = cluster.dims();
  CperCurve out;
  out.t_grid = t_grid;
  const std::vector<int> chain = adjacency_chain(cluster, options.chamber);
  if (chain.size() < 2)
    fail(ErrorCode::DisconnectedChamber, "chamber is not linked to the exterior");

  SurgeryOptions base;
  base.K_user = options.K_user;
  base.probes = options.probes;
  base.seed = options.seed;
  // The interface point does not depend on omega_hat beyond rho; fix it once.
  const SurgeryPlan anchor = plan_surgery(cluster, field, chain[0], chain[1], base);
  const Point x = anchor.x_bar;

  bool vanishing = false;
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    const double t = t_grid[k];
    const double w = modulus_of_continuity(field, x, std::pow(t, 1.0 / N), options.probes, N);
    out.omega_curve.push_back(std::pow(w, 1.0 / N));
    SurgeryOptions opts = base;
    if (w > 0.0) opts.omega_override = w;
    else vanishing = true;

    double cap = t;
    try {
      const SurgeryPlan p = plan_surgery(cluster, field, chain[0], chain[1], opts, x);
      cap = std::min(cap, p.eps_bar);
    } catch (const Error&) {
      // The samples below report the failure individually.
    }
    out.eps_caps.push_back(cap);

    std::mt19937_64 rng(options.seed * 1000003ULL + k);
    std::uniform_real_distribution<double> mag(std::log(options.min_fraction), 0.0);
    std::bernoulli_distribution sign(0.5);
    double best = 0.0;
    int ok = 0;
    int bad = 0;
    for (int s = 0; s < options.samples; ++s) {
      const double e = cap * std::exp(mag(rng)) * (sign(rng) ? 1.0 : -1.0);
      try {
        const auto [F, rep] = adjust_single_chamber(cluster, field, options.chamber, e,
                                                    std::nullopt, opts);
        best = std::max(best, rep.increment / std::pow(std::abs(e), (N - 1.0) / N));
        ++ok;
      } catch (const Error&) {
        ++bad;
      }
    }
    out.C_values.push_back(best);
    out.successes.push_back(ok);
    out.failures.push_back(bad);
  }

  out.fit_ratio = 0.0;
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    if (out.omega_curve[k] > 0.0)
      out.fit_ratio = std::max(out.fit_ratio, out.C_values[k] / out.omega_curve[k]);
    else
      out.fit_ratio = std::numeric_limits<double>::infinity();
  }
  if (vanishing)
    out.note = "omega vanishes on part of the grid; omega_hat falls back to K^N / C^N there";
  return out;
}

TruncationTrace boundedness_check(const GridCluster& cluster, const DensityField& field,
                                  double C_prime, const std::vector<double>& t_grid,
                                  const Point& center, bool perimeters) {
  const int N = cluster.dims();
  TruncationTrace tr;
  tr.center = center;
  tr.t_grid = t_grid;
  tr.M = bound_M(field, center, 4096, N);

  std::vector<double> dist(cluster.cell_count());
  std::vector<double> weight(cluster.cell_count(), 0.0);
  for (std::size_t k = 0; k < cluster.cell_count(); ++k) {
    const Index3 c = cluster.unravel(k);
    const Point p = cluster.cell_center(c);
    dist[k] = distance(p, center);
    double occ = 0.0;
    cluster.for_each_occupancy(c, [&](Label l, double frac) {
      if (l != 0) occ += frac;
    });
    weight[k] = occ > 0.0 ? field.f(p) * cluster.cell_volume() * occ : 0.0;
  }
  for (double t : t_grid) {
    double v = 0.0;
    for (std::size_t k = 0; k < weight.size(); ++k)
      if (dist[k] >= t) v += weight[k];
    tr.v_values.push_back(v);
    if (perimeters) {
      GridCluster inside(N, cluster.shape(), cluster.spacing(), cluster.origin(), cluster.m());
      GridCluster outside = inside;
      for (std::size_t k = 0; k < weight.size(); ++k) {
        const Label l = cluster.label(k);
        (dist[k] < t ? inside : outside).mutable_labels()[k] = l;
      }
      tr.perimeter_inside.push_back(cluster_perimeter(inside, field).perimeter);
      tr.perimeter_outside.push_back(cluster_perimeter(outside, field).perimeter);
    }
  }
  const std::size_t n = t_grid.size();
  for (std::size_t k = 0; k < n; ++k) {
    double d = 0.0;
    if (n > 1) {
      const std::size_t a = k == 0 ? 0 : k - 1;
      const std::size_t b = k + 1 == n ? n - 1 : k + 1;
      d = std::abs((tr.v_values[b] - tr.v_values[a]) / (t_grid[b] - t_grid[a]));
    }
    tr.derivative.push_back(d);
    const double margin = d - C_prime * std::pow(tr.v_values[k], (N - 1.0) / N);
    tr.differential_margin.push_back(margin);
    if (margin < 0.0) tr.negative_steps.push_back(k);
    if (k > 0 && t_grid[k] >= t_grid[k - 1] && tr.v_values[k] > tr.v_values[k - 1])
      tr.nonincreasing = false;
  }
  const bool reached = std::any_of(tr.v_values.begin(), tr.v_values.end(),
                                   [](double v) { return v == 0.0; });
  tr.verdict = reached ? "BOUNDED" : "UNBOUNDED-WITHIN-GRID";
  return tr;
}

}  // namespace epsbeta
