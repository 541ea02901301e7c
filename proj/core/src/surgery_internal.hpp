#pragma once

// Helpers shared by the surgery translation units.

#include <vector>

#include "epsbeta/surgery.hpp"

namespace epsbeta::detail {

constexpr double kTol = 1e-9;

/// A facet seen from a working cube: grid coordinates in cell units plus its
/// extent along the cube axis in local heights.
struct FacetGeom {
  const BoundaryFacet* facet = nullptr;
  Point s{0.0, 0.0, 0.0};  ///< (location - origin) / h
  bool horizontal = false;  ///< normal along the cube axis
  int normal_axis = 0;
  double u_lo = 0.0;  ///< local height range (equal for horizontal facets)
  double u_hi = 0.0;

  bool has_label(int l) const { return facet->inside_label == l || facet->outside_label == l; }
  bool pair_is(int a, int b) const {
    return (facet->inside_label == a && facet->outside_label == b) ||
           (facet->inside_label == b && facet->outside_label == a);
  }
  double area() const { return facet->area; }
};

std::vector<FacetGeom> facet_geometry(const GridCluster& cluster,
                                      const std::vector<BoundaryFacet>& facets,
                                      const LocalFrame& frame);

/// Lateral position strictly inside (open) or inside-or-on (closed) the
/// lateral extent of `box`.
bool lateral_open(const FacetGeom& g, const Box& box, int axis, int dims);
bool lateral_closed(const FacetGeom& g, const Box& box, int axis, int dims);

/// Facet strictly inside the open cylinder box x (-A, A).
bool in_open_cylinder(const FacetGeom& g, const Box& box, int axis, int dims, double A);

/// Local heights of the cube columns, in section order.
std::vector<LocalColumn> local_columns(const GridCluster& cluster, const Box& box,
                                       const LocalFrame& frame);

/// Index of the column of `box` that contains lateral cell `cell`.
std::size_t column_index(const Box& box, int axis, const Index3& cell);

double ipow(double x, int n);

}  // namespace epsbeta::detail

namespace epsbeta::detail {

/// Outcome of the one-dimensional solve for the stretch height.
struct StretchSolution {
  GridCluster cluster;
  double delta_cells = 0.0;
  double volume_lo = 0.0;  ///< V at the bracket ends
  double volume_hi = 0.0;
};

/// Applies transfer_column to every column of `box` (heights in cell units of
/// `frame`) with the delta in (lo, hi) whose f-weighted volume gain of `lower`
/// equals `target`.
StretchSolution solve_stretch(const GridCluster& cluster, const DensityField& field,
                              const LocalFrame& frame, const Box& box, int lower, int upper,
                              double sigma_minus, double sigma_plus, double lo, double hi,
                              double target);

}  // namespace epsbeta::detail
