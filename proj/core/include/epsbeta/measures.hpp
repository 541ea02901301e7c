#pragma once

#include <map>
#include <utility>
#include <vector>

#include "epsbeta/density.hpp"
#include "epsbeta/grid_cluster.hpp"

namespace epsbeta {

using LabelPair = std::pair<int, int>;  ///< (i, j) with i < j

struct MeasureReport {
  std::vector<double> volumes;                ///< m entries; volumes[k] is chamber k+1
  double perimeter = 0.0;                     ///< (sum_i P(E_i) + P(union)) / 2
  double perimeter_facets = 0.0;              ///< direct facet sum, stored for comparison
  std::vector<double> per_chamber_perimeter;  ///< m+1 entries; entry 0 is P(union)
  std::map<LabelPair, double> interface_breakdown;

  double volume(int chamber) const { return volumes.at(static_cast<std::size_t>(chamber - 1)); }
  double interface(int i, int j) const;
};

/// Weighted cost of one facet: g(x, nu_out) against the exterior, the
/// average of g(x, nu) and g(x, -nu) between two chambers.
double facet_cost(const BoundaryFacet& facet, const DensityField& field);

/// Midpoint quadrature of f over every chamber, overlay occupancies included.
std::vector<double> weighted_volume(const GridCluster& cluster, const DensityField& field);

MeasureReport cluster_perimeter(const GridCluster& cluster, const DensityField& field,
                                const BoundaryOptions& options = {});
/// Same, on an already extracted facet list.
MeasureReport perimeter_from_facets(const std::vector<BoundaryFacet>& facets, int m,
                                    const DensityField& field);

/// Volumes and perimeter together.
MeasureReport measure(const GridCluster& cluster, const DensityField& field,
                      const BoundaryOptions& options = {});

double unit_ball_volume(int N);
/// N omega_N^{1/N} volume^{(N-1)/N}.
double euclidean_isoperimetric_lower_bound(double volume, int N);

}  // namespace epsbeta
