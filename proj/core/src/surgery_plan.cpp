#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "epsbeta/surgery.hpp"
#include "surgery_internal.hpp"

namespace epsbeta {

namespace detail {

double ipow(double x, int n) {
  double r = 1.0;
  for (int k = 0; k < n; ++k) r *= x;
  return r;
}

std::vector<FacetGeom> facet_geometry(const GridCluster& cluster,
                                      const std::vector<BoundaryFacet>& facets,
                                      const LocalFrame& frame) {
  const double h = cluster.spacing();
  const double face = cluster.face_area();
  std::vector<FacetGeom> out;
  out.reserve(facets.size());
  for (const BoundaryFacet& f : facets) {
    FacetGeom g;
    g.facet = &f;
    for (int d = 0; d < 3; ++d) g.s[d] = (f.location[d] - cluster.origin()[d]) / h;
    int ax = 0;
    for (int d = 1; d < 3; ++d)
      if (std::abs(f.normal[d]) > std::abs(f.normal[ax])) ax = d;
    g.normal_axis = ax;
    g.horizontal = ax == frame.axis;
    const double uc = frame.u_of(g.s[frame.axis]);
    if (g.horizontal) {
      g.u_lo = g.u_hi = uc;
    } else {
      const double half = 0.5 * f.area / face;
      g.u_lo = uc - half;
      g.u_hi = uc + half;
    }
    out.push_back(g);
  }
  return out;
}

bool lateral_open(const FacetGeom& g, const Box& box, int axis, int dims) {
  for (int d = 0; d < dims; ++d) {
    if (d == axis) continue;
    if (!(g.s[d] > box.lo[d] + kTol && g.s[d] < box.hi[d] - kTol)) return false;
  }
  return true;
}

bool lateral_closed(const FacetGeom& g, const Box& box, int axis, int dims) {
  for (int d = 0; d < dims; ++d) {
    if (d == axis) continue;
    if (!(g.s[d] > box.lo[d] - kTol && g.s[d] < box.hi[d] + kTol)) return false;
  }
  return true;
}

bool in_open_cylinder(const FacetGeom& g, const Box& box, int axis, int dims, double A) {
  if (!lateral_open(g, box, axis, dims)) return false;
  if (g.horizontal) return g.u_lo > -A + kTol && g.u_lo < A - kTol;
  return g.u_hi > -A + kTol && g.u_lo < A - kTol;
}

std::vector<LocalColumn> local_columns(const GridCluster& cluster, const Box& box,
                                       const LocalFrame& frame) {
  std::vector<LocalColumn> out;
  for (const ColumnProfile& p : vertical_sections(cluster, box, frame.axis)) {
    LocalColumn c = to_local(p, frame);
    merge_equal(c);
    out.push_back(std::move(c));
  }
  return out;
}

std::size_t column_index(const Box& box, int axis, const Index3& cell) {
  std::size_t slot = 0;
  std::size_t stride = 1;
  for (int k = 0; k < 3; ++k) {
    if (k == axis) continue;
    slot += stride * static_cast<std::size_t>(cell[k] - box.lo[k]);
    stride *= static_cast<std::size_t>(box.hi[k] - box.lo[k]);
  }
  return slot;
}

}  // namespace detail

using namespace detail;

namespace {

double pair_area(const std::vector<BoundaryFacet>& facets, int a, int b) {
  double s = 0.0;
  for (const BoundaryFacet& f : facets)
    if ((f.inside_label == a && f.outside_label == b) || (f.inside_label == b && f.outside_label == a))
      s += f.area;
  return s;
}

void check(std::vector<Check>& out, std::string name, double value, double bound, bool holds) {
  out.push_back(Check{std::move(name), value, bound, holds});
}

/// Share of a facet lying in the slab |u| < w (cell units).
double slab_fraction(const FacetGeom& g, double w) {
  if (g.horizontal) return std::abs(g.u_lo) < w ? 1.0 : 0.0;
  const double len = g.u_hi - g.u_lo;
  if (!(len > 0.0)) return 0.0;
  const double ov = std::min(g.u_hi, w) - std::max(g.u_lo, -w);
  return ov > 0.0 ? ov / len : 0.0;
}

struct Geometry {
  LocalFrame frame;
  Index3 center{0, 0, 0};
};

Geometry geometry_of_facet(const GridCluster& cluster, const BoundaryFacet& f, int i) {
  Geometry g;
  int ax = 0;
  for (int d = 1; d < 3; ++d)
    if (std::abs(f.normal[d]) > std::abs(f.normal[ax])) ax = d;
  const double h = cluster.spacing();
  Point s{};
  for (int d = 0; d < 3; ++d) s[d] = (f.location[d] - cluster.origin()[d]) / h;
  // The normal points away from inside_label.
  const bool normal_up = f.normal[ax] > 0.0;
  const bool i_inside = f.inside_label == i;
  g.frame.axis = ax;
  g.frame.sign = (normal_up == i_inside) ? 1 : -1;
  g.frame.zc = static_cast<int>(std::lround(s[ax]));
  for (int d = 0; d < cluster.dims(); ++d)
    g.center[d] = d == ax ? g.frame.zc : static_cast<int>(std::floor(s[d]));
  return g;
}

int largest_cube(const GridCluster& cluster, const Geometry& geo, int cap) {
  int half = std::numeric_limits<int>::max();
  for (int d = 0; d < cluster.dims(); ++d)
    half = std::min({half, geo.center[d], cluster.shape()[d] - geo.center[d]});
  int n = 2 * std::max(half, 0);
  if (cap > 0) n = std::min(n, cap - cap % 2);
  return n;
}

bool ball_clear(const Point& x, double radius, const std::vector<Ball>& forbidden, double gap) {
  for (const Ball& b : forbidden)
    if (distance(x, b.center) < radius + b.radius + gap) return false;
  return true;
}

FlatnessStats flatness_impl(const GridCluster& cluster, const std::vector<FacetGeom>& geoms,
                            const LocalFrame& frame, const Box& cube, int lower, int upper,
                            double rho, double M, bool early_exit) {
  const int N = cluster.dims();
  const int m = cluster.m();
  const double h = cluster.spacing();
  const int n_a = cube.hi[frame.axis] - cube.lo[frame.axis];
  const double A = 0.5 * n_a;
  const double a = n_a * h;
  const double aN1 = ipow(a, N - 1);
  const double w = n_a * rho;  // slab half-width in cells

  FlatnessStats st;
  double area_i = 0.0;
  double area_j = 0.0;
  for (const FacetGeom& g : geoms) {
    if (!in_open_cylinder(g, cube, frame.axis, N, A)) continue;
    const double in_slab = slab_fraction(g, w);
    const bool has_lo = g.has_label(lower);
    const bool has_up = g.has_label(upper);
    if (has_lo) area_i += g.area() * in_slab;
    if (has_up) area_j += g.area() * in_slab;
    if (has_lo || has_up) st.slab_excess += g.area() * (1.0 - in_slab);
    for (int l : {int(g.facet->inside_label), int(g.facet->outside_label)})
      if (l != lower && l != upper) st.foreign_boundary[l] += g.area();
  }
  st.interface_density_i = area_i / aN1;
  st.interface_density_j = area_j / aN1;
  if (early_exit && (std::abs(st.interface_density_i - 1.0) > rho ||
                     std::abs(st.interface_density_j - 1.0) > rho || st.slab_excess > rho * aN1)) {
    st.misvolume = std::numeric_limits<double>::infinity();
    st.core_pass = false;
    return st;
  }

  // Halfspace mismatch, read cell by cell (overlay cells by occupancy).
  const double mis_limit = ipow(rho, 3) * ipow(a, N);
  double mis = 0.0;
  Index3 c{0, 0, 0};
  bool aborted = false;
  for (c[2] = cube.lo[2]; c[2] < cube.hi[2] && !aborted; ++c[2])
    for (c[1] = cube.lo[1]; c[1] < cube.hi[1] && !aborted; ++c[1])
      for (c[0] = cube.lo[0]; c[0] < cube.hi[0]; ++c[0]) {
        const double u0 = frame.u_of(c[frame.axis]);
        const double u1 = frame.u_of(c[frame.axis] + 1);
        const bool below = std::max(u0, u1) <= 0.0;
        const int want = below ? lower : upper;
        cluster.for_each_occupancy(c, [&](Label l, double frac) {
          if (l != want) mis += frac;
        });
        if (early_exit && mis * ipow(h, N) >= mis_limit) {
          aborted = true;
          break;
        }
      }
  st.misvolume = mis * ipow(h, N);
  if (aborted) {
    st.core_pass = false;
    return st;
  }

  // Foreign chambers on the faces of the cube.
  const double face = cluster.face_area();
  for (c[2] = cube.lo[2]; c[2] < cube.hi[2]; ++c[2])
    for (c[1] = cube.lo[1]; c[1] < cube.hi[1]; ++c[1])
      for (c[0] = cube.lo[0]; c[0] < cube.hi[0]; ++c[0]) {
        int faces = 0;
        for (int d = 0; d < N; ++d) faces += (c[d] == cube.lo[d]) + (c[d] == cube.hi[d] - 1);
        if (faces == 0) {
          // Skip the interior of the row quickly.
          if (c[0] > cube.lo[0] && c[0] < cube.hi[0] - 1) c[0] = cube.hi[0] - 2;
          continue;
        }
        cluster.for_each_occupancy(c, [&](Label l, double frac) {
          if (l != lower && l != upper) st.foreign_trace[l] += faces * frac * face;
        });
      }

  const double dens_tol = rho;
  st.core_pass = true;
  auto core = [&](const std::string& name, double v, double b, bool ok) {
    check(st.checks, name, v, b, ok);
    st.core_pass = st.core_pass && ok;
  };
  core("interface_density_i", std::abs(st.interface_density_i - 1.0), dens_tol,
       std::abs(st.interface_density_i - 1.0) <= dens_tol);
  core("interface_density_j", std::abs(st.interface_density_j - 1.0), dens_tol,
       std::abs(st.interface_density_j - 1.0) <= dens_tol);
  core("slab_excess", st.slab_excess, rho * aN1, st.slab_excess <= rho * aN1);
  core("misvolume", st.misvolume, mis_limit, st.misvolume < mis_limit);

  st.foreign_pass = true;
  const double small = rho / (3.0 * m * M * M) * aN1;
  for (const auto& [n, v] : st.foreign_boundary) {
    const bool ok_small = n == 0 || v < small;
    const bool ok_rho = v < rho * aN1;
    if (n != 0) check(st.checks, "foreign_boundary_" + std::to_string(n), v, small, ok_small);
    check(st.checks, "foreign_boundary_rho_" + std::to_string(n), v, rho * aN1, ok_rho);
    st.foreign_pass = st.foreign_pass && ok_small && ok_rho;
  }
  return st;
}

GoodSetReport good_impl(const GridCluster& cluster, const std::vector<FacetGeom>& geoms,
                        const LocalFrame& frame, const Box& cube, int lower, int upper,
                        double rho) {
  const int N = cluster.dims();
  const int m = cluster.m();
  const double h = cluster.spacing();
  const int n_a = cube.hi[frame.axis] - cube.lo[frame.axis];
  const double A = 0.5 * n_a;
  const double a = n_a * h;
  const double aN1 = ipow(a, N - 1);
  const double w = n_a * rho;

  GoodSetReport r;
  const std::vector<LocalColumn> cols = local_columns(cluster, cube, frame);
  r.total_columns = cols.size();
  r.good.assign(cols.size(), false);
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const LocalColumn& col = cols[k];
    const bool ok = col.size() == 2 && col[0].label == lower && col[1].label == upper &&
                    std::abs(col[1].lo) <= w;
    r.good[k] = ok;
    if (ok) r.columns.push_back(k);
  }
  const double colarea = ipow(h, N - 1);
  r.bad_measure = static_cast<double>(cols.size() - r.columns.size()) * colarea;

  auto bad_at = [&](Index3 cell) {
    for (int d = 0; d < N; ++d)
      if (d != frame.axis && (cell[d] < cube.lo[d] || cell[d] >= cube.hi[d])) return false;
    cell[frame.axis] = cube.lo[frame.axis];
    return !r.good[column_index(cube, frame.axis, cell)];
  };
  for (const FacetGeom& g : geoms) {
    if (!in_open_cylinder(g, cube, frame.axis, N, A)) continue;
    Index3 cell{0, 0, 0};
    for (int d = 0; d < N; ++d) cell[d] = static_cast<int>(std::floor(g.s[d]));
    bool bad = false;
    if (g.horizontal) {
      bad = bad_at(cell);
    } else {
      Index3 left = cell;
      left[g.normal_axis] = static_cast<int>(std::lround(g.s[g.normal_axis])) - 1;
      Index3 right = left;
      right[g.normal_axis] += 1;
      bad = bad_at(left) || bad_at(right);
    }
    if (bad) r.bad_boundary += g.area();
  }
  check(r.checks, "bad_columns", r.bad_measure, (m + 4) * rho * aN1,
        r.bad_measure <= (m + 4) * rho * aN1);
  check(r.checks, "bad_column_boundary", r.bad_boundary, (3 * m + 11) * rho * aN1,
        r.bad_boundary <= (3 * m + 11) * rho * aN1);
  return r;
}

struct CubeCandidate {
  int n = 0;
  FlatnessStats stats;
};

struct CubeSearch {
  std::optional<CubeCandidate> full;
  std::vector<CubeCandidate> core_only;  ///< per level, first core-only candidate
};

/// Dyadic halving with eight candidates in [n/2, n] per level.
CubeSearch search_cube(const GridCluster& cluster, const std::vector<BoundaryFacet>& facets,
                       const Geometry& geo, int lower, int upper, double rho, double M,
                       const SurgeryOptions& options, const Point& x_bar, bool collect_core) {
  CubeSearch out;
  const int N = cluster.dims();
  const double h = cluster.spacing();
  const std::vector<FacetGeom> geoms = facet_geometry(cluster, facets, geo.frame);
  for (int n = largest_cube(cluster, geo, options.max_cube_cells); n >= 8; n = (n / 2) & ~1) {
    std::vector<int> cands;
    for (int k = 0; k < 8; ++k) {
      int c = n - static_cast<int>(std::floor(k * (n / 2.0) / 7.0));
      c &= ~1;
      if (c >= 8 && c >= n / 2 && (cands.empty() || cands.back() != c)) cands.push_back(c);
    }
    std::optional<CubeCandidate> best;
    std::optional<CubeCandidate> core_only;
    for (int c : cands) {
      if (!ball_clear(x_bar, c * h * std::sqrt(double(N)) / 2.0, options.forbidden, 2.0 * h))
        continue;
      const Box cube = cube_box(cluster, geo.frame, geo.center, c);
      FlatnessStats st = flatness_impl(cluster, geoms, geo.frame, cube, lower, upper, rho, M, true);
      if (st.pass()) {
        if (!best || st.foreign_trace_total() < best->stats.foreign_trace_total())
          best = CubeCandidate{c, std::move(st)};
      } else if (st.core_pass && !core_only) {
        core_only = CubeCandidate{c, std::move(st)};
      }
    }
    if (best) {
      out.full = std::move(best);
      return out;
    }
    if (core_only && collect_core) out.core_only.push_back(std::move(*core_only));
  }
  return out;
}

}  // namespace

double FlatnessStats::foreign_trace_total() const {
  double s = 0.0;
  for (const auto& [n, v] : foreign_trace) s += v;
  return s;
}

LocalFrame SurgeryPlan::transfer_frame() const {
  LocalFrame f = frame;
  if (reversed) f.sign = -f.sign;
  return f;
}

double transfer_constant(int N, double M) { return std::ldexp(1.0, N + 3) * N * M * M + 6.0; }

double omega_hat(double omega_x, double K_user, int N, double M) {
  if (omega_x > 0.0) return omega_x;
  return std::pow(K_user / transfer_constant(N, M), N);
}

InterfacePoint orient_pair(const GridCluster& cluster, int i, int j) {
  if (i < 0 || j < 0 || i > cluster.m() || j > cluster.m() || i == j)
    fail(ErrorCode::InvalidArgument, "chamber indices must be distinct and within [0, m]");
  const std::vector<BoundaryFacet> facets = extract_boundary(cluster);
  const double tol = 1e-12 * cluster.face_area();
  if (pair_area(facets, i, j) <= tol)
    fail(ErrorCode::EmptyInterface,
         "no facet between chambers " + std::to_string(i) + " and " + std::to_string(j));
  InterfacePoint ip;
  ip.i = i;
  ip.j = j;
  auto ok = [&](int a) { return a == 0 || pair_area(facets, a, 0) <= tol; };
  if (ok(i)) return ip;
  if (ok(j)) {
    ip.i = j;
    ip.j = i;
    ip.swapped = true;
    return ip;
  }
  fail(ErrorCode::ConditionViolated, "both chambers " + std::to_string(i) + " and " +
                                         std::to_string(j) + " share boundary with the exterior");
}

LocalFrame frame_at(const GridCluster& cluster, const Point& x_bar, int i, int j,
                    Index3* center_node) {
  const std::vector<BoundaryFacet> facets = extract_boundary(cluster);
  const BoundaryFacet* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const BoundaryFacet& f : facets) {
    const bool pair = (f.inside_label == i && f.outside_label == j) ||
                      (f.inside_label == j && f.outside_label == i);
    if (!pair) continue;
    const double d = distance(f.location, x_bar);
    if (d < best_d) {
      best_d = d;
      best = &f;
    }
  }
  if (best == nullptr)
    fail(ErrorCode::EmptyInterface,
         "no facet between chambers " + std::to_string(i) + " and " + std::to_string(j));
  const Geometry g = geometry_of_facet(cluster, *best, i);
  if (center_node != nullptr) *center_node = g.center;
  return g.frame;
}

Box cube_box(const GridCluster& cluster, const LocalFrame& frame, const Index3& center, int n_a) {
  Box b;
  for (int d = 0; d < 3; ++d) {
    if (d >= cluster.dims()) {
      b.lo[d] = 0;
      b.hi[d] = 1;
      continue;
    }
    const int c = d == frame.axis ? frame.zc : center[d];
    b.lo[d] = c - n_a / 2;
    b.hi[d] = c + n_a / 2;
  }
  for (int d = 0; d < 3; ++d)
    if (b.lo[d] < 0 || b.hi[d] > cluster.shape()[d])
      fail(ErrorCode::CubeOutsideGrid, "working cube exceeds the grid");
  return b;
}

FlatnessStats flatness_stats(const GridCluster& cluster, const std::vector<BoundaryFacet>& facets,
                             const LocalFrame& frame, const Box& cube, int i, int j, double rho,
                             double M) {
  return flatness_impl(cluster, facet_geometry(cluster, facets, frame), frame, cube, i, j, rho, M,
                       false);
}

FlatnessStats flatness_stats(const GridCluster& cluster, const Point& x_bar, int i, int j,
                             double a, double rho, double M) {
  Index3 center{};
  const LocalFrame frame = frame_at(cluster, x_bar, i, j, &center);
  const int n_a = 2 * static_cast<int>(std::lround(a / cluster.spacing() / 2.0));
  const Box cube = cube_box(cluster, frame, center, n_a);
  const std::vector<BoundaryFacet> facets = extract_boundary(cluster);
  FlatnessStats st = flatness_stats(cluster, facets, frame, cube, i, j, rho, M);
  const GoodSetReport g =
      good_impl(cluster, facet_geometry(cluster, facets, frame), frame, cube, i, j, rho);
  st.good_fraction = g.total_columns ? double(g.columns.size()) / g.total_columns : 0.0;
  return st;
}

GoodSetReport good_set(const GridCluster& cluster, const std::vector<BoundaryFacet>& facets,
                       const LocalFrame& frame, const Box& cube, int lower, int upper,
                       double rho) {
  return good_impl(cluster, facet_geometry(cluster, facets, frame), frame, cube, lower, upper, rho);
}

GoodSetReport good_set(const GridCluster& cluster, const Point& x_bar, int i, int j, double a,
                       double rho) {
  Index3 center{};
  const LocalFrame frame = frame_at(cluster, x_bar, i, j, &center);
  const int n_a = 2 * static_cast<int>(std::lround(a / cluster.spacing() / 2.0));
  const Box cube = cube_box(cluster, frame, center, n_a);
  return good_set(cluster, extract_boundary(cluster), frame, cube, i, j, rho);
}

namespace {

InterfacePoint locate(const GridCluster& cluster, const std::vector<BoundaryFacet>& facets,
                      InterfacePoint ip, double rho, double M, const SurgeryOptions& options) {
  struct Cand {
    const BoundaryFacet* f;
    Geometry geo;
    int max_n;
  };
  std::vector<Cand> cands;
  for (const BoundaryFacet& f : facets) {
    const bool pair = (f.inside_label == ip.i && f.outside_label == ip.j) ||
                      (f.inside_label == ip.j && f.outside_label == ip.i);
    if (!pair) continue;
    Geometry geo = geometry_of_facet(cluster, f, ip.i);
    cands.push_back(Cand{&f, geo, largest_cube(cluster, geo, options.max_cube_cells)});
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Cand& a, const Cand& b) { return a.max_n > b.max_n; });
  if (static_cast<int>(cands.size()) > options.max_candidates && options.max_candidates > 0) {
    // Even sample across the sorted list so every part of the interface is seen.
    std::vector<Cand> kept;
    const double stride = double(cands.size()) / options.max_candidates;
    for (int k = 0; k < options.max_candidates; ++k)
      kept.push_back(cands[static_cast<std::size_t>(k * stride)]);
    cands = std::move(kept);
  }
  ip.x = cands.front().f->location;
  int best_n = 0;
  for (const Cand& c : cands) {
    if (c.max_n <= best_n) break;
    const CubeSearch s =
        search_cube(cluster, facets, c.geo, ip.i, ip.j, rho, M, options, c.f->location, false);
    if (s.full && s.full->n > best_n) {
      best_n = s.full->n;
      ip.x = c.f->location;
    }
  }
  return ip;
}

double rho_for(double omega_hat_v, double M, int N, int m) {
  const double L = std::pow(omega_hat_v, -1.0 / N);
  const double first =
      std::pow(omega_hat_v, 1.0 / N) / (2.0 * std::ldexp(1.0, N + 3) * M * m * ipow(L, N - 1));
  const double second = 0.5 / (5.0 * std::ldexp(1.0, N + 1) * (m + 3));
  return std::min(first, second);
}

/// Absorbs a foreign chamber of the cube (or the exterior) when the cube is flat
/// but crowded; returns the decrease if the perimeter strictly drops.
std::optional<PerimeterDecrease> try_absorb(const GridCluster& cluster,
                                            const std::vector<BoundaryFacet>& facets,
                                            const DensityField& field, const Geometry& geo,
                                            const CubeCandidate& cand, int i, int j, double rho,
                                            double M) {
  const int N = cluster.dims();
  const int m = cluster.m();
  const Box cube = cube_box(cluster, geo.frame, geo.center, cand.n);
  for (const Overlay& o : cluster.overlays()) {
    const Box b = o.bounds();
    bool meet = true;
    for (int d = 0; d < 3; ++d) meet = meet && b.lo[d] < cube.hi[d] && cube.lo[d] < b.hi[d];
    if (meet) return std::nullopt;
  }
  const double aN1 = ipow(cand.n * cluster.spacing(), N - 1);
  int n = -1;
  for (const auto& [k, v] : cand.stats.foreign_boundary)
    if (k != 0 && v >= rho / (3.0 * m * M * M) * aN1) {
      n = k;
      break;
    }
  int into = -1;
  std::string branch;
  const std::vector<FacetGeom> geoms = facet_geometry(cluster, facets, geo.frame);
  const double A = 0.5 * cand.n;
  std::map<int, double> shared;
  if (n > 0) {
    for (const FacetGeom& g : geoms) {
      if (!in_open_cylinder(g, cube, geo.frame.axis, N, A) || !g.has_label(n)) continue;
      const int other = g.facet->inside_label == n ? g.facet->outside_label : g.facet->inside_label;
      shared[other] += g.area();
    }
    const double total = cand.stats.foreign_boundary.at(n);
    if (shared[0] >= (1.0 - 1.0 / (3.0 * M * M)) * total) {
      into = 0;
      branch = "foreign chamber absorbed by the exterior";
    } else {
      double best = -1.0;
      for (const auto& [k, v] : shared)
        if (k != 0 && k != n && v > best) {
          best = v;
          into = k;
        }
      branch = "foreign chamber absorbed by a neighbour";
    }
  } else if (i != 0 && j != 0 && cand.stats.foreign_boundary.count(0)) {
    n = 0;
    into = j;
    branch = "exterior absorbed by the upper chamber";
  }
  if (n < 0 || into < 0) return std::nullopt;

  GridCluster e2 = cluster;
  Index3 c{0, 0, 0};
  for (c[2] = cube.lo[2]; c[2] < cube.hi[2]; ++c[2])
    for (c[1] = cube.lo[1]; c[1] < cube.hi[1]; ++c[1])
      for (c[0] = cube.lo[0]; c[0] < cube.hi[0]; ++c[0])
        if (e2.label(c) == n) e2.set_label(c, static_cast<Label>(into));
  const double before = perimeter_from_facets(facets, m, field).perimeter;
  const double after = cluster_perimeter(e2, field).perimeter;
  if (!(after < before)) return std::nullopt;
  return PerimeterDecrease{n, into, branch, before, after};
}

}  // namespace

InterfacePoint find_interface_point(const GridCluster& cluster, int i, int j, double rho,
                                    const SurgeryOptions& options) {
  const InterfacePoint ip = orient_pair(cluster, i, j);
  return locate(cluster, extract_boundary(cluster), ip, rho, 1.0, options);
}

SurgeryPlan plan_surgery(const GridCluster& cluster, const DensityField& field, int i, int j,
                         const SurgeryOptions& options, std::optional<Point> x_bar) {
  const int N = cluster.dims();
  const int m = cluster.m();
  const double h = cluster.spacing();
  const InterfacePoint oriented = orient_pair(cluster, i, j);
  const std::vector<BoundaryFacet> facets = extract_boundary(cluster);

  SurgeryPlan p;
  p.N = N;
  p.m = m;
  p.h = h;
  p.i = oriented.i;
  p.j = oriented.j;
  p.swapped = oriented.swapped;
  p.condition_holds = oriented.condition_holds;
  p.K_user = options.K_user;
  p.seed = options.seed;

  auto constants_at = [&](const Point& x) {
    const LocalBounds lb = local_bounds(field, x, options.probes, N);
    p.M = lb.M;
    p.omega_x = lb.omega_limit;
    p.omega_hat = options.omega_override ? *options.omega_override
                                         : omega_hat(p.omega_x, p.K_user, N, p.M);
    if (!(p.omega_hat > 0.0)) fail(ErrorCode::InvalidArgument, "omega_hat must be positive");
    p.C = transfer_constant(N, p.M);
    p.L = std::pow(p.omega_hat, -1.0 / N);
    p.rho = rho_for(p.omega_hat, p.M, N, m);
    p.K_required = p.C * std::pow(p.omega_hat, 1.0 / N);
    return lb;
  };

  if (x_bar) {
    p.x_bar = *x_bar;
  } else {
    // Constants depend on the point only through M and omega; take them at a
    // provisional facet, search, then recompute at the chosen point.
    Point first{};
    for (const BoundaryFacet& f : facets)
      if ((f.inside_label == p.i && f.outside_label == p.j) ||
          (f.inside_label == p.j && f.outside_label == p.i)) {
        first = f.location;
        break;
      }
    constants_at(first);
    p.x_bar = locate(cluster, facets, oriented, p.rho, p.M, options).x;
  }
  const LocalBounds lb = constants_at(p.x_bar);
  p.frame = frame_at(cluster, p.x_bar, p.i, p.j, &p.center);
  const Geometry geo{p.frame, p.center};

  const CubeSearch search =
      search_cube(cluster, facets, geo, p.i, p.j, p.rho, p.M, options, p.x_bar, true);
  if (!search.full) {
    for (const CubeCandidate& c : search.core_only) {
      if (auto dec = try_absorb(cluster, facets, field, geo, c, p.i, p.j, p.rho, p.M)) {
        p.n_a = c.n;
        p.a = c.n * h;
        p.cube = cube_box(cluster, p.frame, p.center, c.n);
        p.flatness = c.stats;
        p.decreased = dec;
        return p;
      }
    }
    fail(ErrorCode::FlatnessFailure,
         "no cube around the interface point passes the flatness thresholds (rho = " +
             num(p.rho) + ")");
  }
  p.n_a = search.full->n;
  p.a = p.n_a * h;
  p.cube = cube_box(cluster, p.frame, p.center, p.n_a);
  p.flatness = search.full->stats;
  p.good = good_set(cluster, facets, p.frame, p.cube, p.i, p.j, p.rho);
  p.flatness.good_fraction =
      p.good.total_columns ? double(p.good.columns.size()) / p.good.total_columns : 0.0;

  p.omega_bar = lb.omega_at(p.a * std::sqrt(double(N)) / 2.0);
  check(p.checks, "omega_bar_below_twice_omega_hat", p.omega_bar, 2.0 * p.omega_hat,
        p.omega_bar < 2.0 * p.omega_hat);
  check(p.checks, "rho_constraint", std::ldexp(1.0, N + 3) * p.M * m * ipow(p.L, N - 1) * p.rho,
        std::pow(p.omega_hat, 1.0 / N),
        std::ldexp(1.0, N + 3) * p.M * m * ipow(p.L, N - 1) * p.rho <
            std::pow(p.omega_hat, 1.0 / N));

  const double e1 = std::pow(p.a / (8.0 * p.L), N);
  const double e2 = std::pow(p.a * ipow(p.L, N - 1) / (12.0 * p.M), N);
  const double e3 =
      std::pow(p.a * std::pow(p.omega_hat, 1.0 / N) /
                   (std::ldexp(1.0, N + 7) * m * p.M * p.M * p.rho),
               N);
  p.eps_bar = std::min({e1, e2, e3});

  if (options.trace) {
    nlohmann::json t;
    t["step"] = "cube";
    t["a"] = p.a;
    t["rho"] = p.rho;
    t["interface_density_i"] = p.flatness.interface_density_i;
    t["interface_density_j"] = p.flatness.interface_density_j;
    t["slab_excess"] = p.flatness.slab_excess;
    t["misvolume"] = p.flatness.misvolume;
    t["good_fraction"] = p.flatness.good_fraction;
    t["bad_columns"] = p.good.bad_measure;
    t["bad_column_boundary"] = p.good.bad_boundary;
    t["eps_bar_terms"] = {e1, e2, e3};
    p.trace.push_back(t);
  }
  return p;
}

SurgeryPlan select_subcube_and_strips(const GridCluster& cluster, const SurgeryPlan& plan,
                                      double epsilon) {
  SurgeryPlan p = plan;
  p.epsilon = epsilon;
  p.reversed = epsilon < 0.0;
  if (epsilon == 0.0) {
    p.delta = 0.0;
    return p;
  }
  const int N = p.N;
  const int m = p.m;
  const double h = p.h;
  const double e = std::abs(epsilon);
  if (e > p.eps_bar)
    fail(ErrorCode::EpsilonTooLarge, "|epsilon| = " + num(e) +
                                         " exceeds eps_bar = " + num(p.eps_bar));
  p.ell_nominal = p.L * std::pow(e, 1.0 / N);
  if (p.ell_nominal > p.a / 8.0 * (1.0 + 1e-12))
    fail(ErrorCode::EpsilonTooLarge, "ell exceeds a/8");
  p.n_ell = std::clamp(static_cast<int>(std::lround(p.ell_nominal / h)), 1, p.n_a / 8);
  p.ell = p.n_ell * h;

  const LocalFrame frame = p.transfer_frame();
  const int lower = p.lower();
  const int upper = p.upper();
  const int ax = frame.axis;
  const std::vector<BoundaryFacet> facets = extract_boundary(cluster);
  const std::vector<FacetGeom> geoms = facet_geometry(cluster, facets, frame);
  const GoodSetReport good = good_impl(cluster, geoms, frame, p.cube, lower, upper, p.rho);
  const std::vector<LocalColumn> cols = local_columns(cluster, p.cube, frame);
  const double A = 0.5 * p.n_a;
  const double w = p.n_a * p.rho;
  const double ellN1 = ipow(p.ell, N - 1);
  const double aN1 = ipow(p.a, N - 1);

  // 2H sub-cubes of side 2 ell with a one-cell margin.
  const int per_axis = (p.n_a - 2) / (2 * p.n_ell);
  const int offset0 = (p.n_a - per_axis * 2 * p.n_ell) / 2;
  std::vector<int> lateral;
  for (int d = 0; d < N; ++d)
    if (d != ax) lateral.push_back(d);
  long long total = 1;
  for (std::size_t k = 0; k < lateral.size(); ++k) total *= per_axis;
  p.H = static_cast<int>(total / 2);
  check(p.checks, "H_lower_bound", aN1 / (std::ldexp(1.0, N + 1) * ellN1), double(p.H),
        p.H >= aN1 / (std::ldexp(1.0, N + 1) * ellN1) - 1e-12);
  if (p.H < 1) fail(ErrorCode::NoCandidateCube, "no room for two sub-cubes");
  const double mass_cap = 2.0 * aN1 / p.H;

  auto mass_in = [&](const Box& box) {
    double s = 0.0;
    for (const FacetGeom& g : geoms)
      if (in_open_cylinder(g, box, ax, N, A)) s += g.area();
    return s;
  };
  auto col_of = [&](Index3 cell) -> const LocalColumn& {
    cell[ax] = p.cube.lo[ax];
    return cols[column_index(p.cube, ax, cell)];
  };
  auto wall_points = [&](const LocalColumn& a, const LocalColumn& b) {
    std::set<double> pts;
    for (double x : breakpoints(a))
      if (x > -A && x < A) pts.insert(x);
    for (double x : breakpoints(b))
      if (x > -A && x < A) pts.insert(x);
    return static_cast<double>(pts.size());
  };
  auto wall_measure = [&](const Box& q) {
    double s = 0.0;
    const double unit = ipow(h, N - 2);
    for (int d : lateral) {
      Index3 c{0, 0, 0};
      c[ax] = p.cube.lo[ax];
      // Iterate over the wall cells (the other lateral axis, if any).
      const int other = lateral.size() > 1 ? (d == lateral[0] ? lateral[1] : lateral[0]) : -1;
      const int olo = other >= 0 ? q.lo[other] : 0;
      const int ohi = other >= 0 ? q.hi[other] : 1;
      for (int o = olo; o < ohi; ++o) {
        if (other >= 0) c[other] = o;
        for (int side = 0; side < 2; ++side) {
          const int inner = side == 0 ? q.lo[d] : q.hi[d] - 1;
          const int outer = side == 0 ? q.lo[d] - 1 : q.hi[d];
          Index3 ci = c;
          Index3 co = c;
          ci[d] = inner;
          co[d] = outer;
          s += wall_points(col_of(ci), col_of(co)) * unit;
        }
      }
    }
    return s;
  };

  const double cap_1018 = 1.0 + 5.0 * std::ldexp(1.0, N + 1) * (m + 3) * p.rho;
  const double cap_1019 = 3.0 * std::ldexp(1.0, N + 1) * m * p.rho;
  const double cap_1020 = 3.0 * std::ldexp(1.0, N + 1) * (m + 4) * p.rho;
  const double cap_wall = std::ldexp(1.0, N + 2) * (N - 1) * ipow(p.ell, N - 2);

  bool chosen = false;
  int discarded = 0;
  const long long limit = 2LL * p.H;
  for (long long idx = 0; idx < limit && !chosen; ++idx) {
    Box sub = p.cube;
    long long rem = idx;
    for (int d : lateral) {
      const int k = static_cast<int>(rem % per_axis);
      rem /= per_axis;
      sub.lo[d] = p.cube.lo[d] + offset0 + k * 2 * p.n_ell;
      sub.hi[d] = sub.lo[d] + 2 * p.n_ell;
    }
    if (mass_in(sub) >= mass_cap) {
      ++discarded;
      continue;
    }
    // Offset of Q_ell inside Q_2ell with the smallest wall section.
    Box best_q;
    double best_wall = std::numeric_limits<double>::infinity();
    const int span = p.n_ell + 1;
    long long offsets = 1;
    for (std::size_t k = 0; k < lateral.size(); ++k) offsets *= span;
    for (long long o = 0; o < offsets; ++o) {
      Box q = sub;
      long long r = o;
      for (int d : lateral) {
        q.lo[d] = sub.lo[d] + static_cast<int>(r % span);
        q.hi[d] = q.lo[d] + p.n_ell;
        r /= span;
      }
      const double wm = wall_measure(q);
      if (wm < best_wall) {
        best_wall = wm;
        best_q = q;
      }
    }
    double all = 0.0;
    double theta = 0.0;
    for (const FacetGeom& g : geoms) {
      if (!in_open_cylinder(g, best_q, ax, N, A)) continue;
      all += g.area();
      const bool foreign = !(g.pair_is(lower, upper));
      theta += foreign ? g.area() : g.area() * (1.0 - slab_fraction(g, w));
    }
    long long bad = 0;
    Index3 c{0, 0, 0};
    c[ax] = p.cube.lo[ax];
    for (c[2] = best_q.lo[2]; c[2] < (ax == 2 ? best_q.lo[2] + 1 : best_q.hi[2]); ++c[2])
      for (c[1] = best_q.lo[1]; c[1] < (ax == 1 ? best_q.lo[1] + 1 : best_q.hi[1]); ++c[1])
        for (c[0] = best_q.lo[0]; c[0] < (ax == 0 ? best_q.lo[0] + 1 : best_q.hi[0]); ++c[0]) {
          Index3 cc = c;
          cc[ax] = p.cube.lo[ax];
          if (!good.good[column_index(p.cube, ax, cc)]) ++bad;
        }
    const double bad_area = bad * ipow(h, N - 1);
    const bool ok = all / ellN1 <= cap_1018 && theta / ellN1 <= cap_1019 &&
                    bad_area / ellN1 <= cap_1020;
    if (ok) {
      chosen = true;
      p.Q_eps = best_q;
      check(p.checks, "wall_section", best_wall, cap_wall, best_wall <= cap_wall);
      check(p.checks, "cylinder_boundary", all / ellN1, cap_1018, true);
      check(p.checks, "cylinder_theta", theta / ellN1, cap_1019, true);
      check(p.checks, "cylinder_bad_columns", bad_area / ellN1, cap_1020, true);
    }
  }
  if (!chosen)
    fail(ErrorCode::NoCandidateCube,
         "every sub-cube violates a cylinder bound (" + std::to_string(discarded) +
             " discarded for boundary mass)");
  const Box& Q = p.Q_eps;

  // Strips above the interface and the base section below it.
  p.delta_bar = 2.0 * p.M * e / ellN1;
  const double K_real = std::floor(p.a / (6.0 * p.delta_bar));
  if (K_real < 1.0) fail(ErrorCode::EpsilonTooLarge, "fewer than two strips fit in the cube");
  p.K_strips = 2 * static_cast<long long>(std::min(K_real, 5e17));
  const double slot = (p.a / 2.0 - p.delta_bar - p.a * p.rho) / static_cast<double>(p.K_strips);
  if (!(slot >= p.delta_bar))
    fail(ErrorCode::StripSelectionFailure, "strips of height delta_bar do not fit disjointly");
  std::vector<const FacetGeom*> near;
  for (const FacetGeom& g : geoms)
    if (lateral_closed(g, Q, ax, N)) near.push_back(&g);
  const double strip_cap = 5.0 * std::ldexp(1.0, N + 2) * m * p.rho * ellN1 * p.delta_bar / p.a;
  const long long scan = std::min<long long>(p.K_strips, 1000000);
  for (long long k = 0; k < scan; ++k) {
    const double s0 = p.a * p.rho + (k + 0.5) * slot - p.delta_bar / 2.0;
    const double s1 = s0 + p.delta_bar;
    double mass = 0.0;
    for (const FacetGeom* g : near) {
      const double lo = g->u_lo * h;
      const double hi = g->u_hi * h;
      if (g->horizontal) {
        if (lo >= s0 - kTol * h && lo <= s1 + kTol * h) mass += g->area();
      } else {
        const double ov = std::min(hi, s1) - std::max(lo, s0);
        if (ov > 0.0) mass += g->area() * ov / (hi - lo);
      }
    }
    if (mass <= strip_cap) {
      p.strip_index = k;
      p.sigma_plus = s0;
      check(p.checks, "strip_boundary", mass, strip_cap, true);
      break;
    }
  }
  if (p.strip_index < 0)
    fail(ErrorCode::StripSelectionFailure, "no strip meets the boundary-mass bound");

  const double section_cap = std::ldexp(1.0, N + 4) * m * p.rho * ellN1 / p.a;
  std::vector<const LocalColumn*> qcols;
  {
    Index3 c{0, 0, 0};
    c[ax] = p.cube.lo[ax];
    for (c[2] = Q.lo[2]; c[2] < (ax == 2 ? Q.lo[2] + 1 : Q.hi[2]); ++c[2])
      for (c[1] = Q.lo[1]; c[1] < (ax == 1 ? Q.lo[1] + 1 : Q.hi[1]); ++c[1])
        for (c[0] = Q.lo[0]; c[0] < (ax == 0 ? Q.lo[0] + 1 : Q.hi[0]); ++c[0])
          qcols.push_back(&col_of(c));
  }
  bool found = false;
  for (int k = 0; -A + k + 0.5 < -w; ++k) {
    const double u = -A + k + 0.5;
    if (u * h >= -p.a * p.rho) break;
    bool generic = true;
    for (const LocalColumn* col : qcols)
      for (double b : breakpoints(*col)) generic = generic && std::abs(b - u) > 1e-12;
    if (!generic) continue;
    double section = 0.0;
    for (const FacetGeom* g : near)
      if (!g->horizontal && lateral_open(*g, Q, ax, N) && g->u_lo < u && g->u_hi > u)
        section += ipow(h, N - 2);
    if (section <= section_cap) {
      p.sigma_minus = u * h;
      check(p.checks, "base_section", section, section_cap, true);
      found = true;
      break;
    }
  }
  if (!found) fail(ErrorCode::StripSelectionFailure, "no admissible base height below the interface");

  const bool ordered = -p.a / 2.0 < p.sigma_minus && p.sigma_minus < -p.a * p.rho &&
                       p.a * p.rho < p.sigma_plus && p.sigma_plus < p.a / 2.0 - p.delta_bar;
  check(p.checks, "height_ordering", ordered ? 0.0 : 1.0, 0.0, ordered);
  if (!ordered) fail(ErrorCode::StripSelectionFailure, "strip heights out of order");

  nlohmann::json t;
  t["step"] = "selection";
  t["epsilon"] = epsilon;
  t["ell"] = p.ell;
  t["n_ell"] = p.n_ell;
  t["H"] = p.H;
  t["discarded_subcubes"] = discarded;
  t["delta_bar"] = p.delta_bar;
  t["K_strips"] = p.K_strips;
  t["strip_index"] = p.strip_index;
  t["sigma_minus"] = p.sigma_minus;
  t["sigma_plus"] = p.sigma_plus;
  p.trace.push_back(t);
  return p;
}

}  // namespace epsbeta
