#include "epsbeta/grid_cluster.hpp"

#include <algorithm>
#include <string>

namespace epsbeta {

namespace {

bool is_integral(double v) { return v == std::floor(v); }

Box dilate(const Box& b, int dims) {
  Box d = b;
  for (int k = 0; k < dims; ++k) {
    d.lo[k] -= 1;
    d.hi[k] += 1;
  }
  return d;
}

bool intersects(const Box& a, const Box& b) {
  for (int k = 0; k < 3; ++k)
    if (a.hi[k] <= b.lo[k] || b.hi[k] <= a.lo[k]) return false;
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// ColumnProfile

Label ColumnProfile::label_at(double s) const {
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), s);
  return labels[static_cast<std::size_t>(it - breakpoints.begin())];
}

double ColumnProfile::occupancy(Label l, double a, double b) const {
  a = std::max(a, lo);
  b = std::min(b, hi);
  double total = 0.0;
  double lower = lo;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const double upper = k < breakpoints.size() ? breakpoints[k] : hi;
    if (labels[k] == l) {
      const double len = std::min(upper, b) - std::max(lower, a);
      if (len > 0.0) total += len;
    }
    lower = upper;
  }
  return total;
}

void ColumnProfile::normalize() {
  std::vector<double> bp;
  std::vector<Label> lb;
  double lower = lo;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const double upper = k < breakpoints.size() ? breakpoints[k] : hi;
    if (upper > lower && (lb.empty() || lb.back() != labels[k])) {
      if (!lb.empty()) bp.push_back(lower);
      lb.push_back(labels[k]);
    }
    lower = std::max(lower, upper);
  }
  if (lb.empty()) lb.push_back(labels.empty() ? Label{0} : labels.front());
  breakpoints = std::move(bp);
  labels = std::move(lb);
}

// ---------------------------------------------------------------------------
// Overlay

Overlay::Overlay(int axis, int z_lo, int z_hi, std::vector<ColumnProfile> columns)
    : axis_(axis), z_lo_(z_lo), z_hi_(z_hi), columns_(std::move(columns)) {
  if (axis_ < 0 || axis_ > 2 || z_hi_ <= z_lo_)
    fail(ErrorCode::InvalidArgument, "overlay axis or range invalid");
  for (std::size_t k = 0; k < columns_.size(); ++k) {
    const ColumnProfile& c = columns_[k];
    if (c.axis != axis_ || c.lo != z_lo_ || c.hi != z_hi_ ||
        c.labels.size() != c.breakpoints.size() + 1)
      fail(ErrorCode::ProfileMismatch, "overlay column does not match overlay range");
    if (!index_.emplace(key(c.base), k).second)
      fail(ErrorCode::ProfileMismatch, "duplicate overlay column");
  }
}

long long Overlay::key(const Index3& c) const {
  Index3 k = c;
  k[axis_] = 0;
  // Lateral indices are bounded by the grid shape, far below 2^20.
  return (static_cast<long long>(k[0]) << 42) | (static_cast<long long>(k[1]) << 21) |
         static_cast<long long>(k[2]);
}

const ColumnProfile* Overlay::find_column(const Index3& cell) const {
  auto it = index_.find(key(cell));
  return it == index_.end() ? nullptr : &columns_[it->second];
}

const ColumnProfile* Overlay::find(const Index3& cell) const {
  if (cell[axis_] < z_lo_ || cell[axis_] >= z_hi_) return nullptr;
  return find_column(cell);
}

Box Overlay::bounds() const {
  Box b;
  if (columns_.empty()) {
    b.hi = b.lo;
    return b;
  }
  for (int k = 0; k < 3; ++k) {
    b.lo[k] = columns_.front().base[k];
    b.hi[k] = columns_.front().base[k] + 1;
  }
  for (const auto& c : columns_)
    for (int k = 0; k < 3; ++k) {
      b.lo[k] = std::min(b.lo[k], c.base[k]);
      b.hi[k] = std::max(b.hi[k], c.base[k] + 1);
    }
  b.lo[axis_] = z_lo_;
  b.hi[axis_] = z_hi_;
  return b;
}

// ---------------------------------------------------------------------------
// GridCluster

GridCluster::GridCluster(int dims, Index3 shape, double spacing, Point origin, int m)
    : dims_(dims), shape_(shape), spacing_(spacing), origin_(origin), m_(m) {
  if (dims_ == 2) shape_[2] = 1;
  if (dims_ == 2) origin_[2] = 0.0;
  validate();
  labels_.assign(static_cast<std::size_t>(shape_[0]) * shape_[1] * shape_[2], Label{0});
}

void GridCluster::validate() const {
  if (dims_ != 2 && dims_ != 3) fail(ErrorCode::InvalidArgument, "dims must be 2 or 3");
  for (int k = 0; k < 3; ++k)
    if (shape_[k] < 1) fail(ErrorCode::InvalidArgument, "shape entries must be >= 1");
  if (dims_ == 2 && shape_[2] != 1) fail(ErrorCode::InvalidArgument, "2D grids have shape[2] == 1");
  if (!(spacing_ > 0.0) || !std::isfinite(spacing_))
    fail(ErrorCode::InvalidArgument, "spacing must be positive");
  if (m_ < 0 || m_ > 255) fail(ErrorCode::InvalidArgument, "m must lie in [0, 255]");
  for (Label l : labels_)
    if (l > m_) fail(ErrorCode::InvalidArgument, "label exceeds m: " + std::to_string(l));
}

Index3 GridCluster::unravel(std::size_t k) const {
  const auto nx = static_cast<std::size_t>(shape_[0]);
  const auto ny = static_cast<std::size_t>(shape_[1]);
  return Index3{static_cast<int>(k % nx), static_cast<int>((k / nx) % ny),
                static_cast<int>(k / (nx * ny))};
}

void GridCluster::set_label(const Index3& c, Label l) {
  if (!in_grid(c)) fail(ErrorCode::InvalidArgument, "cell outside grid");
  if (l > m_) fail(ErrorCode::InvalidArgument, "label exceeds m");
  labels_[linear(c)] = l;
}

Point GridCluster::cell_center(const Index3& c) const {
  Point p{0.0, 0.0, 0.0};
  for (int k = 0; k < dims_; ++k) p[k] = origin_[k] + (c[k] + 0.5) * spacing_;
  return p;
}

Point GridCluster::node(const Index3& c) const {
  Point p{0.0, 0.0, 0.0};
  for (int k = 0; k < dims_; ++k) p[k] = origin_[k] + c[k] * spacing_;
  return p;
}

const ColumnProfile* GridCluster::overlay_column(const Index3& c) const {
  for (const Overlay& o : overlays_) {
    if (c[o.axis()] < o.z_lo() || c[o.axis()] >= o.z_hi()) continue;
    if (const ColumnProfile* col = o.find_column(c)) return col;
  }
  return nullptr;
}

std::vector<LedgerEntry> GridCluster::ledger() const {
  std::vector<LedgerEntry> out;
  for (const Overlay& o : overlays_) {
    for (const ColumnProfile& col : o.columns()) {
      Index3 c = col.base;
      for (int z = o.z_lo(); z < o.z_hi(); ++z) {
        c[o.axis()] = z;
        const std::size_t k = linear(c);
        const Label raster = labels_[k];
        bool raster_seen = false;
        for_each_occupancy(c, [&](Label l, double frac) {
          const double corr = frac - (l == raster ? 1.0 : 0.0);
          if (l == raster) raster_seen = true;
          if (corr != 0.0) out.push_back({k, l, corr});
        });
        if (!raster_seen) out.push_back({k, raster, -1.0});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const LedgerEntry& a, const LedgerEntry& b) {
    return a.cell != b.cell ? a.cell < b.cell : a.label < b.label;
  });
  return out;
}

void GridCluster::add_overlay(Overlay overlay) {
  if (overlay.columns().empty()) return;
  if (overlay.axis() >= dims_) fail(ErrorCode::InvalidArgument, "overlay axis exceeds dims");
  const Box nb = overlay.bounds();
  for (int k = 0; k < 3; ++k)
    if (nb.lo[k] < 0 || nb.hi[k] > shape_[k])
      fail(ErrorCode::CubeOutsideGrid, "overlay exceeds grid extent");
  for (const ColumnProfile& c : overlay.columns())
    for (Label l : c.labels)
      if (l > m_) fail(ErrorCode::InvalidArgument, "overlay label exceeds m");

  for (Overlay& o : overlays_) {
    const bool compatible =
        o.axis() == overlay.axis() && o.z_lo() == overlay.z_lo() && o.z_hi() == overlay.z_hi();
    if (compatible) {
      if (!intersects(dilate(o.bounds(), dims_), nb)) continue;
      std::vector<ColumnProfile> merged = o.columns();
      for (const ColumnProfile& c : overlay.columns()) {
        if (o.find_column(c.base) != nullptr)
          fail(ErrorCode::LedgerConflict, "overlay column already present");
        merged.push_back(c);
      }
      o = Overlay(o.axis(), o.z_lo(), o.z_hi(), std::move(merged));
      return;
    }
    if (intersects(dilate(o.bounds(), dims_), nb))
      fail(ErrorCode::LedgerConflict, "overlays with different frames must be separated");
  }
  overlays_.push_back(std::move(overlay));
}

void GridCluster::remove_overlay_columns(const Box& region, int axis) {
  std::vector<Overlay> kept;
  for (Overlay& o : overlays_) {
    if (!intersects(o.bounds(), region)) {
      kept.push_back(std::move(o));
      continue;
    }
    if (o.axis() != axis || o.z_lo() < region.lo[axis] || o.z_hi() > region.hi[axis])
      fail(ErrorCode::LedgerConflict, "region cuts through an overlay with a different frame");
    std::vector<ColumnProfile> rest;
    for (const ColumnProfile& c : o.columns()) {
      Index3 probe = c.base;
      probe[axis] = region.lo[axis];
      if (!region.contains(probe)) rest.push_back(c);
    }
    if (!rest.empty()) kept.emplace_back(o.axis(), o.z_lo(), o.z_hi(), std::move(rest));
  }
  overlays_ = std::move(kept);
}

// ---------------------------------------------------------------------------
// Sections and rasterisation

ColumnProfile column_profile(const GridCluster& cluster, const Index3& base, int axis, int z_lo,
                             int z_hi) {
  ColumnProfile p;
  p.base = base;
  p.base[axis] = z_lo;
  p.axis = axis;
  p.lo = z_lo;
  p.hi = z_hi;
  auto push = [&p](double start, Label l) {
    if (p.labels.empty()) {
      p.labels.push_back(l);
    } else if (p.labels.back() != l) {
      p.breakpoints.push_back(start);
      p.labels.push_back(l);
    }
  };
  Index3 c = base;
  for (int z = z_lo; z < z_hi; ++z) {
    c[axis] = z;
    const ColumnProfile* col =
        cluster.has_overlays() && cluster.in_grid(c) ? cluster.overlay_column(c) : nullptr;
    if (col == nullptr) {
      push(z, cluster.label(c));
      continue;
    }
    if (col->axis != axis)
      fail(ErrorCode::LedgerConflict, "column crosses an overlay with a different axis");
    double lower = col->lo;
    for (std::size_t k = 0; k < col->labels.size(); ++k) {
      const double upper = k < col->breakpoints.size() ? col->breakpoints[k] : col->hi;
      const double a = std::max(lower, static_cast<double>(z));
      const double b = std::min(upper, static_cast<double>(z + 1));
      if (b > a) push(a, col->labels[k]);
      lower = upper;
    }
  }
  if (p.labels.empty()) p.labels.push_back(0);
  return p;
}

std::vector<ColumnProfile> vertical_sections(const GridCluster& cluster, const Box& cube,
                                             int axis) {
  if (axis < 0 || axis >= cluster.dims()) fail(ErrorCode::InvalidArgument, "axis out of range");
  for (int k = 0; k < 3; ++k)
    if (cube.lo[k] < 0 || cube.hi[k] > cluster.shape()[k] || cube.lo[k] >= cube.hi[k])
      fail(ErrorCode::CubeOutsideGrid, "cube outside grid extent");
  std::vector<ColumnProfile> out;
  out.reserve(static_cast<std::size_t>(cube.count() / (cube.hi[axis] - cube.lo[axis])));
  Index3 c{0, 0, 0};
  for (c[2] = cube.lo[2]; c[2] < (axis == 2 ? cube.lo[2] + 1 : cube.hi[2]); ++c[2])
    for (c[1] = cube.lo[1]; c[1] < (axis == 1 ? cube.lo[1] + 1 : cube.hi[1]); ++c[1])
      for (c[0] = cube.lo[0]; c[0] < (axis == 0 ? cube.lo[0] + 1 : cube.hi[0]); ++c[0])
        out.push_back(column_profile(cluster, c, axis, cube.lo[axis], cube.hi[axis]));
  return out;
}

GridCluster rasterize_profiles(const std::vector<ColumnProfile>& profiles,
                               const GridCluster& cluster, const Box& cube) {
  if (profiles.empty()) fail(ErrorCode::ProfileMismatch, "no profiles supplied");
  const int axis = profiles.front().axis;
  if (axis < 0 || axis >= cluster.dims()) fail(ErrorCode::ProfileMismatch, "profile axis invalid");
  for (int k = 0; k < 3; ++k)
    if (cube.lo[k] < 0 || cube.hi[k] > cluster.shape()[k] || cube.lo[k] >= cube.hi[k])
      fail(ErrorCode::CubeOutsideGrid, "cube outside grid extent");
  const long long expected = cube.count() / (cube.hi[axis] - cube.lo[axis]);
  if (static_cast<long long>(profiles.size()) != expected)
    fail(ErrorCode::ProfileMismatch, "profiles do not cover every column of the cube");

  GridCluster out = cluster;
  out.remove_overlay_columns(cube, axis);
  std::vector<ColumnProfile> exact;
  std::vector<char> seen(static_cast<std::size_t>(expected), 0);
  std::vector<std::pair<Label, double>> shares;
  for (const ColumnProfile& p : profiles) {
    Index3 probe = p.base;
    probe[axis] = cube.lo[axis];
    if (p.axis != axis || !cube.contains(probe) || p.lo != cube.lo[axis] ||
        p.hi != cube.hi[axis] || p.labels.size() != p.breakpoints.size() + 1)
      fail(ErrorCode::ProfileMismatch, "profile does not match the cube");
    std::size_t slot = 0;
    std::size_t stride = 1;
    for (int k = 0; k < 3; ++k) {
      if (k == axis) continue;
      slot += stride * static_cast<std::size_t>(probe[k] - cube.lo[k]);
      stride *= static_cast<std::size_t>(cube.hi[k] - cube.lo[k]);
    }
    if (seen[slot]++) fail(ErrorCode::ProfileMismatch, "duplicate profile column");
    for (std::size_t k = 0; k + 1 < p.labels.size(); ++k)
      if (!(p.breakpoints[k] > p.lo && p.breakpoints[k] < p.hi) ||
          (k > 0 && !(p.breakpoints[k] > p.breakpoints[k - 1])))
        fail(ErrorCode::ProfileMismatch, "breakpoints must be strictly increasing inside the range");

    bool integral = true;
    for (double b : p.breakpoints) integral = integral && is_integral(b);

    Index3 c = probe;
    for (int z = cube.lo[axis]; z < cube.hi[axis]; ++z) {
      c[axis] = z;
      // Majority over the cell's extent; equal shares keep the lower interval.
      shares.clear();
      double lower = p.lo;
      for (std::size_t k = 0; k < p.labels.size(); ++k) {
        const double upper = k < p.breakpoints.size() ? p.breakpoints[k] : p.hi;
        const double len = std::min(upper, z + 1.0) - std::max(lower, static_cast<double>(z));
        if (len > 0.0) {
          auto it = std::find_if(shares.begin(), shares.end(),
                                 [&](const auto& s) { return s.first == p.labels[k]; });
          if (it == shares.end()) shares.emplace_back(p.labels[k], len);
          else it->second += len;
        }
        lower = upper;
      }
      std::size_t best = 0;
      for (std::size_t k = 1; k < shares.size(); ++k)
        if (shares[k].second > shares[best].second) best = k;
      out.set_label(c, shares[best].first);
    }
    if (!integral) {
      ColumnProfile q = p;
      q.base = probe;
      q.normalize();
      exact.push_back(std::move(q));
    }
  }
  if (!exact.empty()) out.add_overlay(Overlay(axis, cube.lo[axis], cube.hi[axis], std::move(exact)));
  return out;
}

}  // namespace epsbeta
