#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "epsbeta/density.hpp"
#include "epsbeta/grid_cluster.hpp"

namespace epsbeta {

/// One step of the dyadic radius search.
struct RadiusProbe {
  double r_bar = 0.0;
  bool small = false;      ///< |G cap B(x, r_bar)| <= omega_N r_bar^N / (4H)^N
  double passing_r = 0.0;  ///< largest passing radius at this level, 0 if none
};

struct RadiusSearch {
  double radius = 0.0;
  std::vector<RadiusProbe> levels;
};

/// Largest radius r in some [r_bar/2, r_bar] whose sphere carries at most
/// 1/H of the boundary of G cap B(x, r), where G is everything outside E_i
/// and E_j. Throws NoValidRadius below three cells.
double density_zero_radius(const GridCluster& cluster, const Point& x, int i, int j, double H);
RadiusSearch density_zero_radius_trace(const GridCluster& cluster, const Point& x, int i, int j,
                                       double H);

struct InfiltrationReport {
  Point center{0.0, 0.0, 0.0};
  double radius = 0.0;
  int i = 0;
  int j = 0;
  bool swapped = false;
  double M = 1.0;
  double H_const = 10.0;
  double infiltration_volume = 0.0;  ///< unweighted |I|
  double D_area = 0.0;
  double Gamma1_area = 0.0;
  double Gamma2_area = 0.0;
  int case_taken = 0;  ///< 1: I joins E_i, 2: I joins E_j, 0: nothing to absorb
  bool no_infiltration = false;
  double perimeter_before = 0.0;
  double perimeter_after = 0.0;
  double perimeter_drop = 0.0;
  double symmetric_difference_volume = 0.0;  ///< f-weighted, summed over nonzero chambers
  double C_const = 0.0;
  double drop_bound = 0.0;  ///< C |F delta E|^{(N-1)/N}
  bool drop_bound_holds = true;
  bool ball_cleared = true;
  bool confined = true;
  std::vector<std::size_t> mask;  ///< linear indices of I
};

/// min(N w_N^{1/N} / (3M (2M)^{(N-1)/N}), N w_N^{1/N} / (10 M^3 (2M)^{(N-1)/N})).
double infiltration_constant(int N, double M);

/// Absorbs I = B(x, r) \ (E_i cup E_j) into E_i or E_j, whichever the boundary
/// split allows. Raster labels only: the ball may not meet an overlay.
std::pair<GridCluster, InfiltrationReport> infiltrate(const GridCluster& cluster,
                                                      const DensityField& field, const Point& x,
                                                      int i, int j, double r);

}  // namespace epsbeta
