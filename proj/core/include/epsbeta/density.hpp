#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "epsbeta/grid_cluster.hpp"

namespace epsbeta {

/// Volume density f(x) and perimeter density g(x, nu) with Hölder metadata.
struct DensityField {
  std::function<double(const Point&)> f;
  std::function<double(const Point&, const Point&)> g;
  double alpha = 0.0;
  std::string family_tag = "constant";
  /// Declared Hölder constant of g in the first variable, if the family has one.
  std::optional<double> holder_constant;
  /// False for families that are only lower semicontinuous; sampled suprema
  /// may then undershoot and reports say so.
  bool continuous = true;
  /// Configuration the field was built from (echoed into reports).
  nlohmann::json config = nlohmann::json::object();

  double f_eval(const Point& x) const { return f(x); }
  double g_eval(const Point& x, const Point& nu) const { return g(x, nu); }
};

/// g̃(x, nu) = (g(x, nu) + g(x, -nu)) / 2 with f unchanged.
DensityField symmetrized(const DensityField& field);

DensityField constant_density(double f0 = 1.0, double g0 = 1.0);
/// f and g both of the form clamp(c0 + <b, x>, lo, hi).
DensityField affine_clamped(double f0, const Point& f_grad, double g0, const Point& g_grad,
                            double lo, double hi);
/// g = g0 + c * min(|x - x0|, 1)^alpha, f = f0.
DensityField radial_holder(const Point& x0, double g0, double c, double alpha, double f0 = 1.0);
/// Values switch across the hyperplane {x[axis] = threshold}; lower values on
/// the closed low side keep the field lower semicontinuous.
DensityField piecewise_constant(int axis, double threshold, double f_low, double f_high,
                                double g_low, double g_high);
/// g(x, nu) = h(x) (1 + c <nu, u>) with h = h0 + hc * min(|x - x0|, 1)^alpha.
DensityField direction_weighted(double c, const Point& u, double h0 = 1.0, double hc = 0.0,
                                const Point& x0 = {0.0, 0.0, 0.0}, double alpha = 1.0,
                                double f0 = 1.0);
DensityField expression_density(const std::string& f_expr, const std::string& g_expr,
                                double alpha = 0.0);

/// Builds a field from the JSON config format
/// {"family": ..., "params": {...}, "alpha": ...} or
/// {"expression_f": ..., "expression_g": ..., "alpha": ...}.
DensityField density_from_json(const nlohmann::json& config);
DensityField load_density(const std::string& path);

/// (alpha + (N-1)(1-alpha)) / (alpha + N(1-alpha)).
double beta_exponent(double alpha, int N);

/// Deterministic probe sets shared by the sampling routines.
std::vector<Point> sample_ball(const Point& x, double t, int dims, int probes);
std::vector<Point> sample_directions(int dims, int count);

/// Sampled lower bound on sup |g(y,nu) - g(z,nu)| over y, z in B(x,t).
double modulus_of_continuity(const DensityField& field, const Point& x, double t, int probes,
                             int dims = 2);

struct LocalBounds {
  Point center{0.0, 0.0, 0.0};
  double M = 1.0;
  std::vector<double> t_values;      ///< 2^0, 2^-1, ..., 2^-10
  std::vector<double> omega_values;  ///< running maximum, nondecreasing in t
  double omega_limit = 0.0;  ///< 0 for continuous families, finest sample otherwise
  bool may_undershoot = false;

  /// Table lookup: value at the smallest tabulated t >= query (the largest
  /// entry beyond the table).
  double omega_at(double t) const;
};

LocalBounds local_bounds(const DensityField& field, const Point& x, int probes, int dims = 2);

/// Max over probes in B(x,1) of max(f, 1/f, g, 1/g), at least 1.
double bound_M(const DensityField& field, const Point& x, int probes, int dims = 2);

}  // namespace epsbeta
