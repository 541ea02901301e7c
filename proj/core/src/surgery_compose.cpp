#include <algorithm>
#include <cfloat>
#include <cmath>
#include <deque>

#include "epsbeta/surgery.hpp"
#include "surgery_internal.hpp"

namespace epsbeta {

using namespace detail;

namespace {

/// Pairs that share boundary and satisfy the orientation condition in at
/// least one order.
std::vector<std::vector<int>> adjacency(const GridCluster& cluster) {
  const int m = cluster.m();
  const std::vector<BoundaryFacet> facets = extract_boundary(cluster);
  std::vector<std::vector<double>> area(m + 1, std::vector<double>(m + 1, 0.0));
  for (const BoundaryFacet& f : facets) {
    area[f.inside_label][f.outside_label] += f.area;
    area[f.outside_label][f.inside_label] += f.area;
  }
  const double tol = 1e-12 * cluster.face_area();
  auto sealed = [&](int a) { return a == 0 || area[a][0] <= tol; };
  std::vector<std::vector<int>> adj(m + 1);
  for (int a = 0; a <= m; ++a)
    for (int b = a + 1; b <= m; ++b)
      if (area[a][b] > tol && (sealed(a) || sealed(b))) {
        adj[a].push_back(b);
        adj[b].push_back(a);
      }
  return adj;
}

}  // namespace

std::vector<int> adjacency_chain(const GridCluster& cluster, int h) {
  if (h < 1 || h > cluster.m()) fail(ErrorCode::InvalidArgument, "chamber index out of range");
  const std::vector<std::vector<int>> adj = adjacency(cluster);
  std::vector<int> parent(adj.size(), -1);
  std::deque<int> queue{h};
  parent[h] = h;
  while (!queue.empty()) {
    const int a = queue.front();
    queue.pop_front();
    if (a == 0) break;
    for (int b : adj[a])
      if (parent[b] < 0) {
        parent[b] = a;
        queue.push_back(b);
      }
  }
  if (parent[0] < 0) return {};
  std::vector<int> chain{0};
  while (chain.back() != h) chain.push_back(parent[chain.back()]);
  std::reverse(chain.begin(), chain.end());
  return chain;
}

std::pair<GridCluster, AdjustReport> adjust_single_chamber(const GridCluster& cluster,
                                                           const DensityField& field, int h,
                                                           double epsilon,
                                                           std::optional<Ball> excluded_ball,
                                                           const SurgeryOptions& options) {
  AdjustReport rep;
  rep.h = h;
  rep.epsilon = epsilon;
  rep.chain = adjacency_chain(cluster, h);
  if (rep.chain.empty())
    fail(ErrorCode::DisconnectedChamber,
         "chamber " + std::to_string(h) + " is not linked to the exterior");
  rep.before = measure(cluster, field);

  GridCluster current = cluster;
  SurgeryOptions opts = options;
  if (excluded_ball) opts.forbidden.push_back(*excluded_ball);
  const int N = cluster.dims();
  for (std::size_t l = 0; l + 1 < rep.chain.size(); ++l) {
    const int to = rep.chain[l];
    const int from = rep.chain[l + 1];
    SurgeryPlan plan;
    try {
      plan = plan_surgery(current, field, to, from, opts);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::FlatnessFailure && !opts.forbidden.empty())
        fail(ErrorCode::BallPackingFailure,
             "no flat cube disjoint from the earlier balls: " + std::string(e.what()));
      throw;
    }
    const double eps_t = plan.i == to ? epsilon : -epsilon;
    TransferResult res = transfer_volume(current, field, plan, eps_t);
    const TransferBound tb = verify_transfer_bound(res.before, res.after, eps_t, field, res.plan);

    ChainTransfer ct;
    ct.from = from;
    ct.to = to;
    ct.x_bar = plan.x_bar;
    ct.ball = Ball{plan.x_bar, plan.a * std::sqrt(double(N)) / 2.0};
    ct.increment = tb.increment;
    ct.K_required = plan.K_required;
    ct.bound_holds = tb.holds;
    rep.transfers.push_back(ct);
    rep.balls.push_back(ct.ball);
    opts.forbidden.push_back(ct.ball);
    rep.K0 = std::max(rep.K0, plan.K_required);
    current = std::move(res.cluster);
    if (res.perimeter_decreased) {
      rep.perimeter_decreased = true;
      break;
    }
  }
  rep.after = measure(current, field);
  rep.increment = rep.after.perimeter - rep.before.perimeter;
  rep.bound = cluster.m() * rep.K0 * std::pow(std::abs(epsilon), (N - 1.0) / N);
  rep.bound_holds =
      rep.increment <= rep.bound + 64.0 * DBL_EPSILON * std::max(1.0, rep.before.perimeter);
  return {std::move(current), rep};
}

std::pair<GridCluster, InBallReport> adjust_in_ball(const GridCluster& cluster,
                                                    const DensityField& field, int i, int j,
                                                    const Ball& ball, double epsilon) {
  const int N = cluster.dims();
  const double h = cluster.spacing();
  InBallReport rep;
  rep.i = i;
  rep.j = j;
  rep.ball = ball;
  rep.epsilon = epsilon;
  rep.beta = beta_exponent(field.alpha, N);
  rep.before = measure(cluster, field);

  Index3 c{0, 0, 0};
  const Box all = cluster.full_box();
  for (c[2] = all.lo[2]; c[2] < all.hi[2]; ++c[2])
    for (c[1] = all.lo[1]; c[1] < all.hi[1]; ++c[1])
      for (c[0] = all.lo[0]; c[0] < all.hi[0]; ++c[0]) {
        if (distance(cluster.cell_center(c), ball.center) > ball.radius) continue;
        cluster.for_each_occupancy(c, [&](Label l, double) {
          if (l != i && l != j)
            fail(ErrorCode::BallNotBiphase,
                 "chamber " + std::to_string(int(l)) + " meets the ball");
        });
      }

  Index3 center{};
  const LocalFrame base = frame_at(cluster, ball.center, i, j, &center);
  const Point node = cluster.node(center);
  Point cube_center = node;
  cube_center[base.axis] = cluster.coordinate(base.axis, base.zc);
  const double d = distance(cube_center, ball.center);
  int n_a = static_cast<int>(std::floor(2.0 * (ball.radius - d) / (h * std::sqrt(double(N)))));
  n_a -= n_a % 2;
  if (n_a < 8) fail(ErrorCode::InvalidArgument, "ball too small for a working cube");
  const Box cube = cube_box(cluster, base, center, n_a);
  rep.x_bar = cube_center;

  LocalFrame frame = base;
  if (epsilon < 0.0) frame.sign = -frame.sign;
  const int lower = epsilon < 0.0 ? j : i;
  const int upper = epsilon < 0.0 ? i : j;
  const double e = std::abs(epsilon);
  if (e == 0.0) return {cluster, rep};

  const int ax = frame.axis;
  rep.n_ell = std::clamp(static_cast<int>(std::lround(std::pow(e, 1.0 / N) / h)), 1, n_a / 4);
  Box box = cube;
  for (int k = 0; k < N; ++k) {
    if (k == ax) continue;
    box.lo[k] = center[k] - rep.n_ell / 2;
    box.hi[k] = box.lo[k] + rep.n_ell;
  }
  const double A = 0.5 * n_a;
  double top_break = -A;
  for (const LocalColumn& col : local_columns(cluster, box, frame))
    for (double b : breakpoints(col)) top_break = std::max(top_break, b);
  const double sm = -A + 0.5;
  const double sp = top_break + 0.5;
  const double M = bound_M(field, ball.center, 4096, N);
  const double dbar = 2.0 * M * e / std::pow(rep.n_ell * h, N - 1) / h;
  if (!(sp + dbar < A)) fail(ErrorCode::EpsilonTooLarge, "stretch leaves the ball cube");

  StretchSolution s = solve_stretch(cluster, field, frame, box, lower, upper, sm, sp,
                                    dbar / (4.0 * M * M), dbar, e);
  rep.delta = s.delta_cells * h;
  rep.after = measure(s.cluster, field);

  const DensityField sym = symmetrized(field);
  auto inside = [&](const GridCluster& g) {
    double sum = 0.0;
    for (const BoundaryFacet& f : extract_boundary(g))
      if (distance(f.location, ball.center) < ball.radius) sum += facet_cost(f, sym);
    return sum;
  };
  rep.increment = inside(s.cluster) - inside(cluster);
  rep.ratio = rep.increment / std::pow(e, rep.beta);

  rep.confined = true;
  for (c[2] = all.lo[2]; c[2] < all.hi[2]; ++c[2])
    for (c[1] = all.lo[1]; c[1] < all.hi[1]; ++c[1])
      for (c[0] = all.lo[0]; c[0] < all.hi[0]; ++c[0])
        if (s.cluster.label(c) != cluster.label(c) &&
            distance(cluster.cell_center(c), ball.center) > ball.radius)
          rep.confined = false;
  for (const Overlay& o : s.cluster.overlays()) {
    const auto& old = cluster.overlays();
    if (std::find(old.begin(), old.end(), o) != old.end()) continue;
    const Box b = o.bounds();
    const Point lo = cluster.node(b.lo);
    const Point hi = cluster.node(b.hi);
    for (int k = 0; k < (1 << N); ++k) {
      Point corner{};
      for (int dd = 0; dd < 3; ++dd) corner[dd] = (k >> dd) & 1 ? hi[dd] : lo[dd];
      if (N == 2) corner[2] = ball.center[2];
      if (distance(corner, ball.center) > ball.radius * (1.0 + 1e-12)) rep.confined = false;
    }
  }
  return {std::move(s.cluster), rep};
}

}  // namespace epsbeta
