#include "epsbeta/density.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "epsbeta/expression.hpp"

namespace epsbeta {

namespace {

double clamp01_dist(const Point& x, const Point& x0) { return std::min(distance(x, x0), 1.0); }

Point to_point(const nlohmann::json& j) {
  Point p{0.0, 0.0, 0.0};
  if (!j.is_array() || j.size() > 3)
    fail(ErrorCode::InvalidDensity, "expected an array of at most 3 numbers");
  for (std::size_t k = 0; k < j.size(); ++k) p[k] = j[k].get<double>();
  return p;
}

nlohmann::json from_point(const Point& p) { return nlohmann::json::array({p[0], p[1], p[2]}); }

double radical_inverse(unsigned index, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * (index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

}  // namespace

DensityField symmetrized(const DensityField& field) {
  DensityField out = field;
  auto g = field.g;
  out.g = [g](const Point& x, const Point& nu) {
    return 0.5 * (g(x, nu) + g(x, Point{-nu[0], -nu[1], -nu[2]}));
  };
  out.family_tag = field.family_tag + "+symmetrized";
  return out;
}

DensityField constant_density(double f0, double g0) {
  DensityField d;
  d.f = [f0](const Point&) { return f0; };
  d.g = [g0](const Point&, const Point&) { return g0; };
  d.alpha = 1.0;
  d.family_tag = "constant";
  d.holder_constant = 0.0;
  d.config = {{"family", "constant"}, {"params", {{"f", f0}, {"g", g0}}}};
  return d;
}

DensityField affine_clamped(double f0, const Point& f_grad, double g0, const Point& g_grad,
                            double lo, double hi) {
  DensityField d;
  d.f = [=](const Point& x) { return std::clamp(f0 + dot(f_grad, x), lo, hi); };
  d.g = [=](const Point& x, const Point&) { return std::clamp(g0 + dot(g_grad, x), lo, hi); };
  d.alpha = 1.0;
  d.family_tag = "affine_clamped";
  d.holder_constant = norm(g_grad);
  d.config = {{"family", "affine_clamped"},
              {"params",
               {{"f0", f0}, {"f_grad", from_point(f_grad)}, {"g0", g0},
                {"g_grad", from_point(g_grad)}, {"lo", lo}, {"hi", hi}}}};
  return d;
}

DensityField radial_holder(const Point& x0, double g0, double c, double alpha, double f0) {
  DensityField d;
  d.f = [f0](const Point&) { return f0; };
  d.g = [=](const Point& x, const Point&) { return g0 + c * std::pow(clamp01_dist(x, x0), alpha); };
  d.alpha = alpha;
  d.family_tag = "radial_holder";
  d.holder_constant = std::abs(c);
  d.config = {{"family", "radial_holder"},
              {"params",
               {{"x0", from_point(x0)}, {"g0", g0}, {"c", c}, {"alpha", alpha}, {"f0", f0}}}};
  return d;
}

DensityField piecewise_constant(int axis, double threshold, double f_low, double f_high,
                                double g_low, double g_high) {
  if (axis < 0 || axis > 2) fail(ErrorCode::InvalidDensity, "piecewise axis out of range");
  DensityField d;
  d.f = [=](const Point& x) { return x[axis] <= threshold ? f_low : f_high; };
  d.g = [=](const Point& x, const Point&) { return x[axis] <= threshold ? g_low : g_high; };
  d.alpha = 0.0;
  d.family_tag = "piecewise_constant";
  d.continuous = false;
  d.config = {{"family", "piecewise_constant"},
              {"params",
               {{"axis", axis}, {"threshold", threshold}, {"f_low", f_low}, {"f_high", f_high},
                {"g_low", g_low}, {"g_high", g_high}}}};
  return d;
}

DensityField direction_weighted(double c, const Point& u, double h0, double hc, const Point& x0,
                                double alpha, double f0) {
  if (!(c > -1.0 && c < 1.0)) fail(ErrorCode::InvalidDensity, "direction weight c must lie in (-1, 1)");
  DensityField d;
  d.f = [f0](const Point&) { return f0; };
  d.g = [=](const Point& x, const Point& nu) {
    const double h = h0 + hc * std::pow(clamp01_dist(x, x0), alpha);
    return h * (1.0 + c * dot(nu, u));
  };
  d.alpha = hc != 0.0 ? alpha : 1.0;
  d.family_tag = "direction_weighted";
  d.holder_constant = std::abs(hc) * (1.0 + std::abs(c) * norm(u));
  d.config = {{"family", "direction_weighted"},
              {"params",
               {{"c", c}, {"u", from_point(u)}, {"h0", h0}, {"hc", hc}, {"x0", from_point(x0)},
                {"alpha", alpha}, {"f0", f0}}}};
  return d;
}

DensityField expression_density(const std::string& f_expr, const std::string& g_expr,
                                double alpha) {
  const Expression fe = Expression::parse(f_expr);
  const Expression ge = Expression::parse(g_expr);
  // Type-check once so that vector-valued expressions fail at load time.
  (void)fe(Point{0.0, 0.0, 0.0}, Point{1.0, 0.0, 0.0});
  (void)ge(Point{0.0, 0.0, 0.0}, Point{1.0, 0.0, 0.0});
  DensityField d;
  d.f = [fe](const Point& x) { return fe(x, Point{1.0, 0.0, 0.0}); };
  d.g = [ge](const Point& x, const Point& nu) { return ge(x, nu); };
  d.alpha = alpha;
  d.family_tag = "custom expression";
  d.config = {{"expression_f", f_expr}, {"expression_g", g_expr}, {"alpha", alpha}};
  return d;
}

DensityField density_from_json(const nlohmann::json& j) {
  try {
    if (j.contains("expression_f") || j.contains("expression_g")) {
      return expression_density(j.value("expression_f", std::string("1")),
                                j.value("expression_g", std::string("1")), j.value("alpha", 0.0));
    }
    const std::string family = j.value("family", std::string("constant"));
    const nlohmann::json p = j.value("params", nlohmann::json::object());
    DensityField d;
    if (family == "constant") {
      d = constant_density(p.value("f", 1.0), p.value("g", 1.0));
    } else if (family == "affine_clamped") {
      d = affine_clamped(p.value("f0", 1.0), to_point(p.value("f_grad", nlohmann::json::array())),
                         p.value("g0", 1.0), to_point(p.value("g_grad", nlohmann::json::array())),
                         p.value("lo", 1e-3), p.value("hi", 1e3));
    } else if (family == "radial_holder") {
      d = radial_holder(to_point(p.value("x0", nlohmann::json::array())), p.value("g0", 1.0),
                        p.value("c", 1.0), p.value("alpha", 1.0), p.value("f0", 1.0));
    } else if (family == "piecewise_constant") {
      d = piecewise_constant(p.value("axis", 0), p.value("threshold", 0.0), p.value("f_low", 1.0),
                             p.value("f_high", 1.0), p.value("g_low", 1.0), p.value("g_high", 1.0));
    } else if (family == "direction_weighted") {
      d = direction_weighted(p.value("c", 0.0), to_point(p.value("u", nlohmann::json::array({1.0}))),
                             p.value("h0", 1.0), p.value("hc", 0.0),
                             to_point(p.value("x0", nlohmann::json::array())),
                             p.value("alpha", 1.0), p.value("f0", 1.0));
    } else {
      fail(ErrorCode::InvalidDensity, "unknown density family '" + family + "'");
    }
    if (j.contains("alpha")) {
      d.alpha = j.at("alpha").get<double>();
      d.config["alpha"] = d.alpha;
    }
    if (d.alpha < 0.0 || d.alpha > 1.0) fail(ErrorCode::InvalidDensity, "alpha must lie in [0, 1]");
    return d;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidDensity, std::string("malformed density config: ") + e.what());
  }
}

DensityField load_density(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open density file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidDensity, std::string("density file is not JSON: ") + e.what());
  }
  return density_from_json(j);
}

double beta_exponent(double alpha, int N) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorCode::InvalidArgument, "alpha must lie in [0, 1]");
  if (N < 2) fail(ErrorCode::InvalidArgument, "N must be at least 2");
  return (alpha + (N - 1) * (1.0 - alpha)) / (alpha + N * (1.0 - alpha));
}

std::vector<Point> sample_directions(int dims, int count) {
  std::vector<Point> out;
  for (int k = 0; k < dims; ++k) {
    out.push_back(axis_vector(k, 1.0));
    out.push_back(axis_vector(k, -1.0));
  }
  if (dims == 2) {
    for (int k = 0; k < count; ++k) {
      const double th = 2.0 * std::numbers::pi * (k + 0.5) / count;
      out.push_back(Point{std::cos(th), std::sin(th), 0.0});
    }
  } else {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      out.push_back(Point{r * std::cos(golden * k), r * std::sin(golden * k), z});
    }
  }
  return out;
}

std::vector<Point> sample_ball(const Point& x, double t, int dims, int probes) {
  static constexpr unsigned bases[3] = {2, 3, 5};
  std::vector<Point> out;
  out.push_back(x);
  for (const Point& d : sample_directions(dims, dims == 2 ? 16 : 32))
    out.push_back(Point{x[0] + t * d[0], x[1] + t * d[1], x[2] + t * d[2]});
  int accepted = 0;
  for (unsigned idx = 1; accepted < probes && idx < 64u * static_cast<unsigned>(probes) + 64u; ++idx) {
    Point u{0.0, 0.0, 0.0};
    for (int k = 0; k < dims; ++k) u[k] = 2.0 * radical_inverse(idx, bases[k]) - 1.0;
    if (dot(u, u) > 1.0) continue;
    out.push_back(Point{x[0] + t * u[0], x[1] + t * u[1], x[2] + t * u[2]});
    ++accepted;
  }
  return out;
}

double modulus_of_continuity(const DensityField& field, const Point& x, double t, int probes,
                             int dims) {
  if (!(t > 0.0)) fail(ErrorCode::InvalidArgument, "t must be positive");
  if (probes < 2) fail(ErrorCode::InvalidArgument, "probes must be at least 2");
  const std::vector<Point> ys = sample_ball(x, t, dims, probes);
  double best = 0.0;
  for (const Point& nu : sample_directions(dims, dims == 2 ? 16 : 32)) {
    double lo = INFINITY;
    double hi = -INFINITY;
    for (const Point& y : ys) {
      const double v = field.g(y, nu);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    best = std::max(best, hi - lo);
  }
  return best;
}

double bound_M(const DensityField& field, const Point& x, int probes, int dims) {
  if (probes < 2) fail(ErrorCode::InvalidArgument, "probes must be at least 2");
  const std::vector<Point> ys = sample_ball(x, 1.0, dims, probes);
  const std::vector<Point> dirs = sample_directions(dims, dims == 2 ? 16 : 32);
  double M = 1.0;
  auto take = [&M](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
      fail(ErrorCode::InvalidDensity, std::string(what) + " is not positive and finite on B(x,1)");
    M = std::max({M, v, 1.0 / v});
  };
  for (const Point& y : ys) {
    take(field.f(y), "f");
    for (const Point& nu : dirs) take(field.g(y, nu), "g");
  }
  return M;
}

double LocalBounds::omega_at(double t) const {
  // t_values is decreasing; pick the smallest tabulated t that still covers t.
  double out = omega_values.empty() ? 0.0 : omega_values.front();
  for (std::size_t k = 0; k < t_values.size(); ++k)
    if (t_values[k] >= t) out = omega_values[k];
  return out;
}

LocalBounds local_bounds(const DensityField& field, const Point& x, int probes, int dims) {
  LocalBounds b;
  b.center = x;
  b.M = bound_M(field, x, probes, dims);
  b.may_undershoot = !field.continuous;
  for (int k = 0; k <= 10; ++k) {
    const double t = std::ldexp(1.0, -k);
    b.t_values.push_back(t);
    b.omega_values.push_back(modulus_of_continuity(field, x, t, probes, dims));
  }
  // Running maximum from the smallest t upwards.
  for (int k = 9; k >= 0; --k)
    b.omega_values[k] = std::max(b.omega_values[k], b.omega_values[k + 1]);
  // A continuous g has omega_x(t) -> 0; sampling at finite t would only report
  // the slope. Jumps survive every scale, so the finest table entry is used.
  b.omega_limit = 0.0;
  if (!field.continuous) {
    b.omega_limit = INFINITY;
    for (std::size_t k = 0; k < b.t_values.size(); ++k)
      if (b.t_values[k] <= 1.0 / 64.0) b.omega_limit = std::min(b.omega_limit, b.omega_values[k]);
  }
  return b;
}

}  // namespace epsbeta
