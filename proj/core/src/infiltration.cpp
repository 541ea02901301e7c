#include "epsbeta/infiltration.hpp"

#include <algorithm>
#include <cmath>

#include "epsbeta/measures.hpp"
#include "epsbeta/surgery.hpp"

namespace epsbeta {

namespace {

constexpr int kRadiiPerLevel = 16;

/// Cells whose centres may fall within r of x (the box may leave the grid).
Box ball_box(const GridCluster& g, const Point& x, double r) {
  Box b;
  for (int d = 0; d < 3; ++d) {
    if (d >= g.dims()) {
      b.lo[d] = 0;
      b.hi[d] = 1;
      continue;
    }
    const double s = (x[d] - g.origin()[d]) / g.spacing();
    const double w = r / g.spacing();
    b.lo[d] = static_cast<int>(std::floor(s - w)) - 1;
    b.hi[d] = static_cast<int>(std::ceil(s + w)) + 2;
  }
  return b;
}

Point center_of(const GridCluster& g, const Index3& c) {
  Point p{0.0, 0.0, 0.0};
  for (int d = 0; d < g.dims(); ++d) p[d] = g.origin()[d] + (c[d] + 0.5) * g.spacing();
  return p;
}

template <class Fn>
void for_box(const Box& b, Fn&& fn) {
  Index3 c{0, 0, 0};
  for (c[2] = b.lo[2]; c[2] < b.hi[2]; ++c[2])
    for (c[1] = b.lo[1]; c[1] < b.hi[1]; ++c[1])
      for (c[0] = b.lo[0]; c[0] < b.hi[0]; ++c[0]) fn(c);
}

struct RadiusTest {
  double sphere = 0.0;    ///< H^{N-1}(dB cap (G cup d*G))
  double boundary = 0.0;  ///< H^{N-1}(d*(G cap B))
};

RadiusTest test_radius(const GridCluster& g, const Point& x, double r, int i, int j) {
  const double face = g.face_area();
  auto in_g = [&](const Index3& c) {
    const int l = g.label(c);
    return l != i && l != j;
  };
  auto in_ball = [&](const Index3& c) { return distance(center_of(g, c), x) <= r; };
  RadiusTest t;
  for_box(ball_box(g, x, r), [&](const Index3& c) {
    if (!in_ball(c)) return;
    const bool gc = in_g(c);
    for (int d = 0; d < g.dims(); ++d)
      for (int s : {-1, 1}) {
        Index3 n = c;
        n[d] += s;
        const bool nb = in_ball(n);
        const bool gn = in_g(n);
        if (!nb && (gc || gn)) t.sphere += face;
        if (gc && !(nb && gn)) t.boundary += face;
      }
  });
  return t;
}

double g_volume(const GridCluster& g, const Point& x, double r, int i, int j) {
  double count = 0.0;
  for_box(ball_box(g, x, r), [&](const Index3& c) {
    const int l = g.label(c);
    if (l != i && l != j && distance(center_of(g, c), x) <= r) count += 1.0;
  });
  return count * g.cell_volume();
}

}  // namespace

RadiusSearch density_zero_radius_trace(const GridCluster& cluster, const Point& x, int i, int j,
                                       double H) {
  if (!(H >= 1.0)) fail(ErrorCode::InvalidArgument, "H must be at least 1");
  const int N = cluster.dims();
  const double h = cluster.spacing();
  double r_bar = 1.0;
  for (int d = 0; d < N; ++d) {
    r_bar = std::min(r_bar, x[d] - cluster.origin()[d]);
    r_bar = std::min(r_bar, cluster.origin()[d] + cluster.shape()[d] * h - x[d]);
  }
  const double wN = unit_ball_volume(N);
  RadiusSearch out;
  for (; r_bar >= 3.0 * h; r_bar *= 0.5) {
    RadiusProbe probe;
    probe.r_bar = r_bar;
    probe.small = g_volume(cluster, x, r_bar, i, j) <= wN * std::pow(r_bar / (4.0 * H), N);
    if (probe.small) {
      for (int k = 0; k < kRadiiPerLevel; ++k) {
        const double r = r_bar - k * (0.5 * r_bar) / (kRadiiPerLevel - 1);
        if (r < 3.0 * h) break;
        const RadiusTest t = test_radius(cluster, x, r, i, j);
        if (t.sphere <= t.boundary / H) {
          probe.passing_r = r;
          break;
        }
      }
    }
    out.levels.push_back(probe);
    if (probe.passing_r > 0.0) {
      out.radius = probe.passing_r;
      return out;
    }
  }
  fail(ErrorCode::NoValidRadius, "no radius above three cells passes the density-zero test");
}

double density_zero_radius(const GridCluster& cluster, const Point& x, int i, int j, double H) {
  return density_zero_radius_trace(cluster, x, i, j, H).radius;
}

double infiltration_constant(int N, double M) {
  const double top = N * std::pow(unit_ball_volume(N), 1.0 / N);
  const double tail = std::pow(2.0 * M, (N - 1.0) / N);
  return std::min(top / (3.0 * M * tail), top / (10.0 * M * M * M * tail));
}

std::pair<GridCluster, InfiltrationReport> infiltrate(const GridCluster& cluster,
                                                      const DensityField& field, const Point& x,
                                                      int i, int j, double r) {
  const int N = cluster.dims();
  const InterfacePoint oriented = orient_pair(cluster, i, j);
  InfiltrationReport rep;
  rep.center = x;
  rep.radius = r;
  rep.i = oriented.i;
  rep.j = oriented.j;
  rep.swapped = oriented.swapped;
  rep.M = bound_M(field, x, 4096, N);
  rep.H_const = 10.0 * std::pow(rep.M, 4);
  rep.C_const = infiltration_constant(N, rep.M);
  i = rep.i;
  j = rep.j;

  const Box bb = ball_box(cluster, x, r);
  auto in_ball = [&](const Index3& c) { return distance(center_of(cluster, c), x) <= r; };
  for (const Overlay& o : cluster.overlays()) {
    const Box b = o.bounds();
    bool meet = true;
    for (int d = 0; d < 3; ++d) meet = meet && b.lo[d] < bb.hi[d] && bb.lo[d] < b.hi[d];
    if (meet) fail(ErrorCode::InvalidArgument, "infiltration ball meets a sub-cell overlay");
  }

  std::vector<Index3> cells;
  for_box(bb, [&](const Index3& c) {
    if (!cluster.in_grid(c) || !in_ball(c)) return;
    const int l = cluster.label(c);
    if (l != i && l != j) cells.push_back(c);
  });
  const MeasureReport before = measure(cluster, field);
  rep.perimeter_before = before.perimeter;
  if (cells.empty()) {
    rep.no_infiltration = true;
    rep.perimeter_after = before.perimeter;
    return {cluster, rep};
  }

  const double face = cluster.face_area();
  auto in_i = [&](const Index3& c) {
    if (!cluster.in_grid(c) || !in_ball(c)) return false;
    const int l = cluster.label(c);
    return l != i && l != j;
  };
  for (const Index3& c : cells) {
    rep.mask.push_back(cluster.linear(c));
    for (int d = 0; d < N; ++d)
      for (int s : {-1, 1}) {
        Index3 n = c;
        n[d] += s;
        if (in_i(n)) continue;
        const int l = cluster.label(n);
        if (in_ball(n) && l == i)
          rep.Gamma1_area += face;
        else if (in_ball(n) && l == j)
          rep.Gamma2_area += face;
        else
          rep.D_area += face;
      }
  }
  rep.infiltration_volume = static_cast<double>(cells.size()) * cluster.cell_volume();

  const double M2 = rep.M * rep.M;
  int into = -1;
  if (rep.Gamma1_area > 2.0 * M2 * (rep.D_area + rep.Gamma2_area)) {
    rep.case_taken = 1;
    into = i;
  } else if (rep.Gamma2_area > 2.0 * M2 * rep.D_area) {
    rep.case_taken = 2;
    into = j;
  } else {
    fail(ErrorCode::CasePartitionFailure,
         "neither boundary split holds: D = " + num(rep.D_area) +
             ", Gamma1 = " + num(rep.Gamma1_area) +
             ", Gamma2 = " + num(rep.Gamma2_area));
  }

  GridCluster out = cluster;
  double sdv = 0.0;
  for (const Index3& c : cells) {
    const double w = field.f(cluster.cell_center(c)) * cluster.cell_volume();
    if (cluster.label(c) != 0) sdv += w;
    if (into != 0) sdv += w;
    out.set_label(c, static_cast<Label>(into));
  }
  rep.symmetric_difference_volume = sdv;
  const MeasureReport after = measure(out, field);
  rep.perimeter_after = after.perimeter;
  rep.perimeter_drop = before.perimeter - after.perimeter;
  rep.drop_bound = rep.C_const * std::pow(sdv, (N - 1.0) / N);
  rep.drop_bound_holds = rep.perimeter_drop >= rep.drop_bound;

  for_box(bb, [&](const Index3& c) {
    if (!cluster.in_grid(c) || !in_ball(c)) return;
    const int l = out.label(c);
    if (l != i && l != j) rep.ball_cleared = false;
  });
  const auto& a = cluster.labels();
  const auto& b = out.labels();
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k] != b[k] && !in_ball(cluster.unravel(k))) rep.confined = false;
  return {std::move(out), rep};
}

}  // namespace epsbeta
