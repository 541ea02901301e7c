#include "epsbeta/measures.hpp"

#include <cmath>
#include <numbers>

namespace epsbeta {

double MeasureReport::interface(int i, int j) const {
  if (i > j) std::swap(i, j);
  auto it = interface_breakdown.find({i, j});
  return it == interface_breakdown.end() ? 0.0 : it->second;
}

double facet_cost(const BoundaryFacet& f, const DensityField& field) {
  if (f.outside_label == 0 || f.inside_label == 0) {
    const Point out = f.outside_label == 0 ? f.normal : Point{-f.normal[0], -f.normal[1], -f.normal[2]};
    return field.g(f.location, out) * f.area;
  }
  const Point minus{-f.normal[0], -f.normal[1], -f.normal[2]};
  return 0.5 * (field.g(f.location, f.normal) + field.g(f.location, minus)) * f.area;
}

std::vector<double> weighted_volume(const GridCluster& cluster, const DensityField& field) {
  std::vector<double> vol(static_cast<std::size_t>(cluster.m()), 0.0);
  const double cell = cluster.cell_volume();
  const bool overlays = cluster.has_overlays();
  const std::size_t n = cluster.cell_count();
  for (std::size_t k = 0; k < n; ++k) {
    const Label l = cluster.label(k);
    if (!overlays) {
      if (l != 0) vol[l - 1] += field.f(cluster.cell_center(cluster.unravel(k))) * cell;
      continue;
    }
    const Index3 c = cluster.unravel(k);
    double fc = -1.0;
    cluster.for_each_occupancy(c, [&](Label lab, double frac) {
      if (lab == 0) return;
      if (fc < 0.0) fc = field.f(cluster.cell_center(c));
      vol[lab - 1] += fc * cell * frac;
    });
  }
  return vol;
}

MeasureReport perimeter_from_facets(const std::vector<BoundaryFacet>& facets, int m,
                                    const DensityField& field) {
  MeasureReport r;
  r.per_chamber_perimeter.assign(static_cast<std::size_t>(m) + 1, 0.0);
  for (const BoundaryFacet& f : facets) {
    const Point& nu = f.normal;
    const Point minus{-nu[0], -nu[1], -nu[2]};
    const double g_in = field.g(f.location, nu) * f.area;     // outer normal of inside_label
    const double g_out = field.g(f.location, minus) * f.area;  // outer normal of outside_label
    r.per_chamber_perimeter[f.inside_label] += f.inside_label == 0 ? 0.0 : g_in;
    if (f.outside_label != 0) r.per_chamber_perimeter[f.outside_label] += g_out;
    if (f.outside_label == 0) r.per_chamber_perimeter[0] += g_in;
    const int i = std::min<int>(f.inside_label, f.outside_label);
    const int j = std::max<int>(f.inside_label, f.outside_label);
    r.interface_breakdown[{i, j}] += facet_cost(f, field);
  }
  double sum = r.per_chamber_perimeter[0];
  for (int i = 1; i <= m; ++i) sum += r.per_chamber_perimeter[static_cast<std::size_t>(i)];
  r.perimeter = 0.5 * sum;
  for (const auto& [key, v] : r.interface_breakdown) r.perimeter_facets += v;
  return r;
}

MeasureReport cluster_perimeter(const GridCluster& cluster, const DensityField& field,
                                const BoundaryOptions& options) {
  return perimeter_from_facets(extract_boundary(cluster, options), cluster.m(), field);
}

MeasureReport measure(const GridCluster& cluster, const DensityField& field,
                      const BoundaryOptions& options) {
  MeasureReport r = cluster_perimeter(cluster, field, options);
  r.volumes = weighted_volume(cluster, field);
  return r;
}

double unit_ball_volume(int N) {
  return std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N + 1.0);
}

double euclidean_isoperimetric_lower_bound(double volume, int N) {
  if (volume < 0.0) fail(ErrorCode::InvalidArgument, "volume must be nonnegative");
  if (volume == 0.0) return 0.0;
  return N * std::pow(unit_ball_volume(N), 1.0 / N) * std::pow(volume, (N - 1.0) / N);
}

}  // namespace epsbeta
