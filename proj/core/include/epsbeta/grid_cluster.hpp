#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "epsbeta/error.hpp"

namespace epsbeta {

using Point = std::array<double, 3>;
using Index3 = std::array<int, 3>;
using Label = std::uint8_t;

inline double dot(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Point& a) { return std::sqrt(dot(a, a)); }
inline double distance(const Point& a, const Point& b) {
  return norm(Point{a[0] - b[0], a[1] - b[1], a[2] - b[2]});
}
inline Point axis_vector(int axis, double sign = 1.0) {
  Point p{0.0, 0.0, 0.0};
  p[axis] = sign;
  return p;
}

/// Half-open box of cell indices, [lo, hi) along every axis. Unused axes of a
/// 2D grid span [0, 1).
struct Box {
  Index3 lo{0, 0, 0};
  Index3 hi{1, 1, 1};

  bool contains(const Index3& c) const {
    return c[0] >= lo[0] && c[0] < hi[0] && c[1] >= lo[1] && c[1] < hi[1] && c[2] >= lo[2] &&
           c[2] < hi[2];
  }
  long long count() const {
    return static_cast<long long>(hi[0] - lo[0]) * (hi[1] - lo[1]) * (hi[2] - lo[2]);
  }
  bool operator==(const Box&) const = default;
};

struct Ball {
  Point center{0.0, 0.0, 0.0};
  double radius = 0.0;
};

/// Run-length decomposition of one grid column along `axis`.
///
/// Heights are measured in cell units along the axis: cell z occupies [z, z+1).
/// The profile describes the range [lo, hi]; breakpoints lie strictly inside it
/// and separate intervals carrying different labels.
struct ColumnProfile {
  Index3 base{0, 0, 0};  ///< cell index of the column, with base[axis] == lo
  int axis = 0;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> breakpoints;
  std::vector<Label> labels;  ///< breakpoints.size() + 1 entries

  Label label_at(double s) const;
  /// Length of {label == l} inside [a, b].
  double occupancy(Label l, double a, double b) const;
  /// Merges equal neighbours and drops empty intervals.
  void normalize();
  bool operator==(const ColumnProfile&) const = default;
};

struct BoundaryFacet {
  Point location{0.0, 0.0, 0.0};
  Point normal{0.0, 0.0, 0.0};  ///< unit, pointing from inside_label to outside_label
  double area = 0.0;
  Label inside_label = 0;
  Label outside_label = 0;
};

/// Difference between the exact per-cell occupancy and the rasterised label.
struct LedgerEntry {
  std::size_t cell = 0;
  Label label = 0;
  double correction = 0.0;  ///< in cell-volume units
};

/// Exact sub-cell description of a group of columns sharing an axis and a
/// height range [z_lo, z_hi). Cells covered by an overlay keep a majority label
/// in the raster, but volumes and boundaries are read from the profiles.
class Overlay {
 public:
  Overlay() = default;
  Overlay(int axis, int z_lo, int z_hi, std::vector<ColumnProfile> columns);

  int axis() const { return axis_; }
  int z_lo() const { return z_lo_; }
  int z_hi() const { return z_hi_; }
  const std::vector<ColumnProfile>& columns() const { return columns_; }

  /// Column whose lateral position matches `cell`, ignoring the height.
  const ColumnProfile* find_column(const Index3& cell) const;
  /// Column covering `cell`, or nullptr if the cell is outside the overlay.
  const ColumnProfile* find(const Index3& cell) const;
  Box bounds() const;

  bool operator==(const Overlay& o) const {
    return axis_ == o.axis_ && z_lo_ == o.z_lo_ && z_hi_ == o.z_hi_ && columns_ == o.columns_;
  }

 private:
  long long key(const Index3& c) const;
  int axis_ = 0;
  int z_lo_ = 0;
  int z_hi_ = 0;
  std::vector<ColumnProfile> columns_;
  std::unordered_map<long long, std::size_t> index_;
};

/// Labelled N-dimensional grid (N = 2 or 3) holding an m-cluster. Label 0 is the
/// exterior chamber; everything outside the grid is exterior as well.
class GridCluster {
 public:
  GridCluster() = default;
  GridCluster(int dims, Index3 shape, double spacing, Point origin, int m);

  int dims() const { return dims_; }
  const Index3& shape() const { return shape_; }
  double spacing() const { return spacing_; }
  const Point& origin() const { return origin_; }
  int m() const { return m_; }
  std::size_t cell_count() const { return labels_.size(); }

  double cell_volume() const { return std::pow(spacing_, dims_); }
  double face_area() const { return std::pow(spacing_, dims_ - 1); }

  bool in_grid(const Index3& c) const {
    return c[0] >= 0 && c[0] < shape_[0] && c[1] >= 0 && c[1] < shape_[1] && c[2] >= 0 &&
           c[2] < shape_[2];
  }
  std::size_t linear(const Index3& c) const {
    return static_cast<std::size_t>(c[0]) +
           static_cast<std::size_t>(shape_[0]) *
               (static_cast<std::size_t>(c[1]) + static_cast<std::size_t>(shape_[1]) * c[2]);
  }
  Index3 unravel(std::size_t k) const;

  /// Label of a cell; 0 for cells outside the grid.
  Label label(const Index3& c) const { return in_grid(c) ? labels_[linear(c)] : Label{0}; }
  Label label(std::size_t k) const { return labels_[k]; }
  void set_label(const Index3& c, Label l);
  const std::vector<Label>& labels() const { return labels_; }
  std::vector<Label>& mutable_labels() { return labels_; }

  Point cell_center(const Index3& c) const;
  Point node(const Index3& c) const;
  /// Physical coordinate of height `s` (cell units) along `axis`.
  double coordinate(int axis, double s) const { return origin_[axis] + s * spacing_; }
  Box full_box() const { return Box{{0, 0, 0}, shape_}; }

  const std::vector<Overlay>& overlays() const { return overlays_; }
  /// Column profile covering `c` if the cell belongs to an overlay.
  const ColumnProfile* overlay_column(const Index3& c) const;
  bool has_overlays() const { return !overlays_.empty(); }

  /// Calls fn(label, fraction) for every label present in the cell. Fractions
  /// are exactly 1 for cells outside overlays.
  template <class Fn>
  void for_each_occupancy(const Index3& c, Fn&& fn) const {
    const ColumnProfile* col = overlays_.empty() ? nullptr : overlay_column(c);
    if (col == nullptr) {
      fn(label(c), 1.0);
      return;
    }
    const int ax = col->axis;
    const double a = c[ax];
    const double b = a + 1.0;
    double lower = col->lo;
    for (std::size_t k = 0; k < col->labels.size(); ++k) {
      const double upper = k < col->breakpoints.size() ? col->breakpoints[k] : col->hi;
      const double len = std::min(upper, b) - std::max(lower, a);
      if (len > 0.0) fn(col->labels[k], len);
      lower = upper;
    }
  }

  /// Per-cell corrections that turn raster counts into exact occupancies.
  std::vector<LedgerEntry> ledger() const;

  /// Installs an overlay after checking it against the grid and the overlays
  /// already present. Overlays may not touch each other (a one-cell gap is
  /// required) so that every lateral face has at most one exact side.
  void add_overlay(Overlay overlay);
  /// Removes the given overlay columns (used when a profile supersedes them).
  void remove_overlay_columns(const Box& region, int axis);

  void validate() const;

  bool operator==(const GridCluster& o) const {
    return dims_ == o.dims_ && shape_ == o.shape_ && spacing_ == o.spacing_ &&
           origin_ == o.origin_ && m_ == o.m_ && labels_ == o.labels_ && overlays_ == o.overlays_;
  }

 private:
  int dims_ = 2;
  Index3 shape_{1, 1, 1};
  double spacing_ = 1.0;
  Point origin_{0.0, 0.0, 0.0};
  int m_ = 0;
  std::vector<Label> labels_;
  std::vector<Overlay> overlays_;
};

struct BoundaryOptions {
  /// Replace axis-aligned facet normals by the renormalised average over
  /// neighbouring facets of the same interface. Off by default.
  bool smooth_normals = false;
};

/// One facet per face between differing labels, faces against the implicit
/// exterior included. Overlay columns contribute their exact sub-cell facets.
/// Interior facets are oriented along +e_d (lower cell inside); facets against
/// the exterior are oriented out of the nonzero chamber.
std::vector<BoundaryFacet> extract_boundary(const GridCluster& cluster,
                                            const BoundaryOptions& options = {});

/// Column profile of the cells [z_lo, z_hi) above `base` along `axis`, reading
/// overlay intervals where present.
ColumnProfile column_profile(const GridCluster& cluster, const Index3& base, int axis, int z_lo,
                             int z_hi);

/// Exact run-length decomposition of every column of `cube` along `axis`,
/// ordered with the lowest lateral axis varying fastest.
std::vector<ColumnProfile> vertical_sections(const GridCluster& cluster, const Box& cube, int axis);

/// Writes profiles back: majority label per cell (ties go to the lower
/// interval) plus an overlay carrying the exact sub-cell occupancies.
GridCluster rasterize_profiles(const std::vector<ColumnProfile>& profiles,
                               const GridCluster& cluster, const Box& cube);

}  // namespace epsbeta
