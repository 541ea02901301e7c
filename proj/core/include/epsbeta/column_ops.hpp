#pragma once

#include <vector>

#include "epsbeta/grid_cluster.hpp"

namespace epsbeta {

/// Frame of a working cube: heights u (in cell units) grow along `sign` times
/// the grid axis and vanish on the grid node `zc`, so that E_i lies below.
struct LocalFrame {
  int axis = 1;
  int sign = 1;
  int zc = 0;

  double u_of(double t) const { return sign * (t - zc); }
  double t_of(double u) const { return zc + sign * u; }
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  Label label = 0;
};

/// Contiguous intervals with increasing u.
using LocalColumn = std::vector<Interval>;

LocalColumn to_local(const ColumnProfile& profile, const LocalFrame& frame);
/// Inverse of to_local; `like` supplies base, axis and range.
ColumnProfile to_grid(const LocalColumn& column, const ColumnProfile& like, const LocalFrame& frame);

Label label_at(const LocalColumn& column, double u);
/// Length of {label == l} within [a, b].
double occupancy(const LocalColumn& column, Label l, double a, double b);
/// Heights where the label changes (strictly inside the column).
std::vector<double> breakpoints(const LocalColumn& column);
void merge_equal(LocalColumn& column);

/// Stretch / translate / squeeze of one column by delta (cell units).
///
/// Inside (sigma_minus, sigma_plus + delta) every point of E_i or E_j becomes
/// i when it belongs to S and j otherwise, where S is the section at
/// sigma_minus stretched over (sigma_minus, sigma_minus + delta] followed by
/// E_i translated up by delta. Foreign labels are never touched.
LocalColumn transfer_column(const LocalColumn& column, Label i, Label j, double sigma_minus,
                            double sigma_plus, double delta);

}  // namespace epsbeta
