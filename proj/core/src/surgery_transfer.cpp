#include <algorithm>
#include <cfloat>
#include <cmath>

#include "epsbeta/surgery.hpp"
#include "surgery_internal.hpp"

namespace epsbeta {

namespace detail {

StretchSolution solve_stretch(const GridCluster& cluster, const DensityField& field,
                              const LocalFrame& frame, const Box& box, int lower, int upper,
                              double sigma_minus, double sigma_plus, double lo, double hi,
                              double target) {
  const int ax = frame.axis;
  const double A = 0.5 * (box.hi[ax] - box.lo[ax]);
  const std::vector<ColumnProfile> profiles = vertical_sections(cluster, box, ax);
  std::vector<LocalColumn> cols;
  cols.reserve(profiles.size());
  for (const ColumnProfile& p : profiles) cols.push_back(to_local(p, frame));

  // Cells whose occupancy can change, with f precomputed at their centres.
  const int k0 = std::max(static_cast<int>(std::floor(sigma_minus)), static_cast<int>(-A));
  const int k1 = std::min(static_cast<int>(std::ceil(sigma_plus + hi)), static_cast<int>(A));
  const double cell = cluster.cell_volume();
  std::vector<std::vector<double>> weight(cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    for (int k = k0; k < k1; ++k) {
      Index3 idx = profiles[c].base;
      idx[ax] = static_cast<int>(std::lround(std::min(frame.t_of(k), frame.t_of(k + 1))));
      weight[c].push_back(field.f(cluster.cell_center(idx)) * cell);
    }
  }
  const Label li = static_cast<Label>(lower);
  const Label lj = static_cast<Label>(upper);
  auto gain = [&](double delta) {
    double v = 0.0;
    double comp = 0.0;  // Neumaier compensation
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const LocalColumn moved = transfer_column(cols[c], li, lj, sigma_minus, sigma_plus, delta);
      for (int k = k0; k < k1; ++k) {
        const double d = occupancy(moved, li, k, k + 1) - occupancy(cols[c], li, k, k + 1);
        if (d == 0.0) continue;
        const double term = weight[c][static_cast<std::size_t>(k - k0)] * d;
        const double t = v + term;
        comp += std::abs(v) >= std::abs(term) ? (v - t) + term : (term - t) + v;
        v = t;
      }
    }
    return v + comp;
  };

  StretchSolution out;
  double vlo = gain(lo);
  double vhi = gain(hi);
  out.volume_lo = vlo;
  out.volume_hi = vhi;
  if (!(vlo < target && target < vhi))
    fail(ErrorCode::BisectionBracketFailure,
         "volume map does not bracket the target: V(lo) = " + num(vlo) +
             ", V(hi) = " + num(vhi) + ", target = " + num(target));
  for (int it = 0; it < 100 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double v = gain(mid);
    if (v < target) {
      lo = mid;
      vlo = v;
    } else {
      hi = mid;
      vhi = v;
    }
  }
  // The map is piecewise linear, so a final secant step lands on the root.
  double delta = vhi > vlo ? lo + (target - vlo) * (hi - lo) / (vhi - vlo) : 0.5 * (lo + hi);
  delta = std::clamp(delta, lo, hi);
  out.delta_cells = delta;

  std::vector<ColumnProfile> moved;
  moved.reserve(cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c)
    moved.push_back(to_grid(transfer_column(cols[c], li, lj, sigma_minus, sigma_plus, delta),
                            profiles[c], frame));
  out.cluster = rasterize_profiles(moved, cluster, box);
  return out;
}

}  // namespace detail

using namespace detail;

namespace {

Box transfer_box(const SurgeryPlan& p) {
  Box b = p.Q_eps;
  b.lo[p.frame.axis] = p.cube.lo[p.frame.axis];
  b.hi[p.frame.axis] = p.cube.hi[p.frame.axis];
  return b;
}

GridCluster absorb(const GridCluster& cluster, const SurgeryPlan& p) {
  GridCluster out = cluster;
  Index3 c{0, 0, 0};
  for (c[2] = p.cube.lo[2]; c[2] < p.cube.hi[2]; ++c[2])
    for (c[1] = p.cube.lo[1]; c[1] < p.cube.hi[1]; ++c[1])
      for (c[0] = p.cube.lo[0]; c[0] < p.cube.hi[0]; ++c[0])
        if (out.label(c) == p.decreased->absorbed)
          out.set_label(c, static_cast<Label>(p.decreased->into));
  return out;
}

}  // namespace

TransferResult transfer_volume(const GridCluster& cluster, const DensityField& field,
                               const SurgeryPlan& plan, double epsilon) {
  TransferResult r;
  r.before = measure(cluster, field);
  if (plan.decreased) {
    r.cluster = absorb(cluster, plan);
    r.plan = plan;
    r.plan.epsilon = epsilon;
    r.after = measure(r.cluster, field);
    r.perimeter_decreased = true;
    return r;
  }
  if (epsilon == 0.0) {
    r.cluster = cluster;
    r.plan = select_subcube_and_strips(cluster, plan, 0.0);
    r.after = r.before;
    return r;
  }
  SurgeryPlan p = select_subcube_and_strips(cluster, plan, epsilon);
  const double h = p.h;
  const double lo = p.delta_bar / (4.0 * p.M * p.M) / h;
  const double hi = p.delta_bar / h;
  StretchSolution s = solve_stretch(cluster, field, p.transfer_frame(), transfer_box(p), p.lower(),
                                    p.upper(), p.sigma_minus / h, p.sigma_plus / h, lo, hi,
                                    std::abs(epsilon));
  p.delta = s.delta_cells * h;
  p.checks.push_back(Check{"volume_map_monotone", s.volume_lo, s.volume_hi,
                           s.volume_lo < s.volume_hi});
  p.checks.push_back(Check{"delta_in_bracket", p.delta, p.delta_bar,
                           p.delta > p.delta_bar / (4.0 * p.M * p.M) && p.delta < p.delta_bar});
  nlohmann::json t;
  t["step"] = "transfer";
  t["delta"] = p.delta;
  t["volume_lo"] = s.volume_lo;
  t["volume_hi"] = s.volume_hi;
  p.trace.push_back(t);
  r.cluster = std::move(s.cluster);
  r.plan = std::move(p);
  r.after = measure(r.cluster, field);
  return r;
}

TransferBound verify_transfer_bound(const MeasureReport& before, const MeasureReport& after,
                                    double epsilon, const DensityField& field,
                                    const SurgeryPlan& plan) {
  (void)field;
  TransferBound b;
  b.increment = after.perimeter - before.perimeter;
  b.K_required = plan.K_required;
  b.bound = plan.K_required * std::pow(std::abs(epsilon), (plan.N - 1.0) / plan.N);
  const double tol = 64.0 * DBL_EPSILON * std::max(1.0, before.perimeter);
  b.holds = b.increment <= b.bound + tol;
  return b;
}

TransferBound verify_transfer_bound(const GridCluster& before_cluster, const TransferResult& result,
                                    const DensityField& field) {
  const SurgeryPlan& p = result.plan;
  TransferBound b = verify_transfer_bound(result.before, result.after, p.epsilon, field, p);
  if (result.perimeter_decreased || p.epsilon == 0.0) return b;

  const int N = p.N;
  const int m = p.m;
  const double h = p.h;
  const LocalFrame frame = p.transfer_frame();
  const int ax = frame.axis;
  const int lower = p.lower();
  const int upper = p.upper();
  const double sm = p.sigma_minus / h;
  const double top = (p.sigma_plus + p.delta) / h;
  const double mid_top = (p.sigma_minus + p.delta) / h;
  const Box& Q = p.Q_eps;

  enum Bucket { kOnlyIJ, kMidBottom, kTop, kInterior, kLateral, kOutside, kCount };
  double sums[kCount] = {};
  auto classify = [&](const FacetGeom& g) {
    const double u = 0.5 * (g.u_lo + g.u_hi);
    if (!lateral_closed(g, Q, ax, N) || u < sm - kTol || u > top + kTol) return kOutside;
    if (!g.pair_is(lower, upper)) return kOnlyIJ;
    if (!g.horizontal) {
      const int pos = static_cast<int>(std::lround(g.s[g.normal_axis]));
      if (std::abs(g.s[g.normal_axis] - pos) < kTol &&
          (pos == Q.lo[g.normal_axis] || pos == Q.hi[g.normal_axis]))
        return kLateral;
    }
    if (u <= mid_top + kTol) return kMidBottom;
    if (std::abs(u - top) <= kTol) return kTop;
    return kInterior;
  };
  auto accumulate = [&](const GridCluster& c, double sign) {
    const std::vector<BoundaryFacet> facets = extract_boundary(c);
    for (const FacetGeom& g : facet_geometry(c, facets, frame))
      sums[classify(g)] += sign * facet_cost(*g.facet, field);
  };
  accumulate(before_cluster, -1.0);
  accumulate(result.cluster, 1.0);

  const double ellN1 = ipow(p.ell, N - 1);
  const double ellN2 = ipow(p.ell, N - 2);
  const double budgets[kCount] = {
      3.0 * std::ldexp(1.0, N + 1) * p.M * m * p.rho * ellN1,
      std::ldexp(1.0, N + 4) * m * p.M * p.delta * p.rho * ellN1 / p.a,
      5.0 * std::ldexp(1.0, N + 2) * m * p.M * p.rho * ellN1 * p.delta_bar / p.a,
      p.omega_bar * (1.0 + 5.0 * std::ldexp(1.0, N + 1) * (m + 3) * p.rho) * ellN1,
      p.M * std::ldexp(1.0, N + 2) * (N - 1) * ellN2 * p.delta,
      0.0,
  };
  static const char* names[kCount] = {"foreign_touching", "stretched_base", "strip_top",
                                      "translated_interior", "lateral_walls", "outside_cylinder"};
  const double tol = 64.0 * DBL_EPSILON * std::max(1.0, result.before.perimeter);
  for (int k = 0; k < kCount; ++k)
    b.terms.push_back(TermReport{names[k], sums[k], budgets[k], sums[k] <= budgets[k] + tol});
  b.outside_residual = sums[kOutside];
  return b;
}

}  // namespace epsbeta
