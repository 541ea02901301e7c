#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "epsbeta/density.hpp"
#include "epsbeta/grid_cluster.hpp"
#include "epsbeta/surgery.hpp"

namespace epsbeta {

struct RequiredK {
  double M = 1.0;
  double omega_x = 0.0;
  double C = 0.0;
  double omega_hat = 0.0;
  double K = 0.0;  ///< C omega_hat^{1/N}
  bool fallback = false;  ///< omega_x = 0, so omega_hat comes from the user K
};

/// From the raw inputs: K = C omega_hat^{1/N} with the fallback omega_hat
/// = K_user^N / C^N when omega_x = 0.
RequiredK required_K(double omega_x, double M, int N, double K_user = 1.0);
/// Same with M and omega_x read from local_bounds at x. `m` is accepted for
/// symmetry with the surgery constants; the value does not depend on it.
RequiredK required_K(const DensityField& field, const Point& x, int N, int m,
                     double K_user = 1.0, int probes = 4096);

struct CperOptions {
  int chamber = 1;  ///< chamber whose volume is adjusted
  int samples = 32;
  std::uint64_t seed = 0;
  int probes = 4096;
  double K_user = 1.0;
  /// Lower end of the sampled |eps| range, as a fraction of the cap.
  double min_fraction = 1e-2;
};

struct CperCurve {
  std::vector<double> t_grid;
  std::vector<double> C_values;
  std::vector<double> omega_curve;  ///< omega(t^{1/N})^{1/N}
  std::vector<int> successes;
  std::vector<int> failures;
  std::vector<double> eps_caps;
  double fit_ratio = 0.0;  ///< +inf when some omega entry vanishes
  std::string note;
};

CperCurve cper_sweep(const GridCluster& cluster, const DensityField& field,
                     const std::vector<double>& t_grid, const CperOptions& options = {});

struct TruncationTrace {
  Point center{0.0, 0.0, 0.0};
  std::vector<double> t_grid;
  std::vector<double> v_values;
  std::vector<double> derivative;  ///< |v'(t)|, centred differences
  std::vector<double> perimeter_inside;   ///< P(E_t)
  std::vector<double> perimeter_outside;  ///< P(E \ E_t)
  std::vector<double> differential_margin;
  std::vector<std::size_t> negative_steps;
  double M = 1.0;
  bool nonincreasing = true;
  std::string verdict;  ///< BOUNDED or UNBOUNDED-WITHIN-GRID
};

/// v(t): f-weighted volume of the cells of the cluster whose centres lie at
/// distance >= t from `center`.
TruncationTrace boundedness_check(const GridCluster& cluster, const DensityField& field,
                                  double C_prime, const std::vector<double>& t_grid,
                                  const Point& center = {0.0, 0.0, 0.0},
                                  bool perimeters = true);

}  // namespace epsbeta
