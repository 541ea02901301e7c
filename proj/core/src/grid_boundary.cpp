#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "epsbeta/grid_cluster.hpp"

namespace epsbeta {

namespace {

// Orientation convention shared by every facet producer: `lower` sits on the
// negative side along `axis`. Interior facets keep +e_axis with the lower cell
// inside; exterior facets point out of the nonzero chamber.
void emit(std::vector<BoundaryFacet>& out, Point location, int axis, Label lower, Label upper,
          double area) {
  if (lower == upper || !(area > 0.0)) return;
  BoundaryFacet f;
  f.location = location;
  f.area = area;
  if (lower == 0) {
    f.inside_label = upper;
    f.outside_label = 0;
    f.normal = axis_vector(axis, -1.0);
  } else {
    f.inside_label = lower;
    f.outside_label = upper;
    f.normal = axis_vector(axis, 1.0);
  }
  out.push_back(f);
}

bool covered(const GridCluster& g, const Index3& c) {
  return g.in_grid(c) && g.overlay_column(c) != nullptr;
}

void overlay_facets(const GridCluster& g, const Overlay& o, std::vector<BoundaryFacet>& out) {
  const int ax = o.axis();
  const double area = g.face_area();
  const double h = g.spacing();
  for (const ColumnProfile& col : o.columns()) {
    Index3 base = col.base;
    Point at = g.cell_center(base);

    // Breakpoints inside the column.
    for (std::size_t k = 0; k < col.breakpoints.size(); ++k) {
      at[ax] = g.coordinate(ax, col.breakpoints[k]);
      emit(out, at, ax, col.labels[k], col.labels[k + 1], area);
    }
    // End caps against the regular cells below and above.
    Index3 below = base;
    below[ax] = o.z_lo() - 1;
    at[ax] = g.coordinate(ax, o.z_lo());
    emit(out, at, ax, g.label(below), col.labels.front(), area);
    Index3 above = base;
    above[ax] = o.z_hi();
    at[ax] = g.coordinate(ax, o.z_hi());
    emit(out, at, ax, col.labels.back(), g.label(above), area);

    // Lateral walls: merge this profile with the neighbouring one.
    for (int d = 0; d < g.dims(); ++d) {
      if (d == ax) continue;
      for (int dir : {-1, 1}) {
        Index3 q = base;
        q[d] += dir;
        const bool same_overlay = g.in_grid(q) && o.find_column(q) != nullptr;
        if (same_overlay && dir < 0) continue;
        const ColumnProfile nb = column_profile(g, q, ax, o.z_lo(), o.z_hi());
        std::vector<double> cuts(col.breakpoints);
        cuts.insert(cuts.end(), nb.breakpoints.begin(), nb.breakpoints.end());
        for (int z = o.z_lo() + 1; z < o.z_hi(); ++z) cuts.push_back(z);
        cuts.push_back(o.z_lo());
        cuts.push_back(o.z_hi());
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        Point wall = g.cell_center(base);
        wall[d] += 0.5 * dir * h;
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
          const double s = cuts[k];
          const double t = cuts[k + 1];
          const double mid = 0.5 * (s + t);
          const Label mine = col.label_at(mid);
          const Label theirs = nb.label_at(mid);
          if (mine == theirs) continue;
          wall[ax] = g.coordinate(ax, mid);
          const double a = (t - s) * area;
          if (dir > 0) emit(out, wall, d, mine, theirs, a);
          else emit(out, wall, d, theirs, mine, a);
        }
      }
    }
  }
}

void smooth(const GridCluster& g, std::vector<BoundaryFacet>& facets) {
  const double h = g.spacing();
  auto key = [&](const Point& p) {
    long long k = 0;
    for (int d = 0; d < 3; ++d) {
      const long long v = static_cast<long long>(std::floor((p[d] - g.origin()[d]) / h)) + 4;
      k = k * 2097152LL + v;
    }
    return k;
  };
  std::unordered_multimap<long long, std::size_t> buckets;
  for (std::size_t k = 0; k < facets.size(); ++k) buckets.emplace(key(facets[k].location), k);

  std::vector<Point> normals(facets.size());
  for (std::size_t k = 0; k < facets.size(); ++k) {
    const BoundaryFacet& f = facets[k];
    Point acc{0.0, 0.0, 0.0};
    Index3 cell{};
    for (int d = 0; d < 3; ++d)
      cell[d] = static_cast<int>(std::floor((f.location[d] - g.origin()[d]) / h));
    for (int dz = (g.dims() == 3 ? -1 : 0); dz <= (g.dims() == 3 ? 1 : 0); ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          Point probe = g.origin();
          probe[0] += (cell[0] + dx + 0.5) * h;
          probe[1] += (cell[1] + dy + 0.5) * h;
          probe[2] += (cell[2] + dz + 0.5) * h;
          auto range = buckets.equal_range(key(probe));
          for (auto it = range.first; it != range.second; ++it) {
            const BoundaryFacet& o = facets[it->second];
            if (distance(o.location, f.location) > 1.5 * h) continue;
            double sign = 0.0;
            if (o.inside_label == f.inside_label && o.outside_label == f.outside_label) sign = 1.0;
            else if (o.inside_label == f.outside_label && o.outside_label == f.inside_label) sign = -1.0;
            for (int d = 0; d < 3; ++d) acc[d] += sign * o.area * o.normal[d];
          }
        }
    const double n = norm(acc);
    normals[k] = n > 0.0 ? Point{acc[0] / n, acc[1] / n, acc[2] / n} : f.normal;
  }
  for (std::size_t k = 0; k < facets.size(); ++k) facets[k].normal = normals[k];
}

}  // namespace

std::vector<BoundaryFacet> extract_boundary(const GridCluster& g, const BoundaryOptions& options) {
  std::vector<BoundaryFacet> out;
  const double area = g.face_area();
  const double h = g.spacing();
  const bool overlays = g.has_overlays();
  const Index3& s = g.shape();
  Index3 c{0, 0, 0};
  for (c[2] = 0; c[2] < s[2]; ++c[2])
    for (c[1] = 0; c[1] < s[1]; ++c[1])
      for (c[0] = 0; c[0] < s[0]; ++c[0]) {
        const Label here = g.label(c);
        const bool here_exact = overlays && covered(g, c);
        for (int d = 0; d < g.dims(); ++d) {
          if (c[d] == 0 && here != 0 && !here_exact) {
            Point at = g.cell_center(c);
            at[d] -= 0.5 * h;
            emit(out, at, d, 0, here, area);
          }
          Index3 n = c;
          n[d] += 1;
          const Label there = g.label(n);
          if (here == there || here_exact || (overlays && covered(g, n))) continue;
          Point at = g.cell_center(c);
          at[d] += 0.5 * h;
          emit(out, at, d, here, there, area);
        }
      }
  for (const Overlay& o : g.overlays()) overlay_facets(g, o, out);
  if (options.smooth_normals) smooth(g, out);
  return out;
}

}  // namespace epsbeta
