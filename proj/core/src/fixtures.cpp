#include "epsbeta/fixtures.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <random>

namespace epsbeta::fixtures {

namespace {

GridCluster square_grid(int n, double lo, double hi, int m) {
  return GridCluster(2, Index3{n, n, 1}, (hi - lo) / n, Point{lo, lo, 0.0}, m);
}

void fill(GridCluster& g, const std::function<int(int, int)>& label) {
  for (int y = 0; y < g.shape()[1]; ++y)
    for (int x = 0; x < g.shape()[0]; ++x)
      g.set_label(Index3{x, y, 0}, static_cast<Label>(label(x, y)));
}

bool in_rect(int x, int y, int x0, int x1, int y0, int y1) {
  return x >= x0 && x < x1 && y >= y0 && y < y1;
}

}  // namespace

GridCluster two_squares() {
  GridCluster g(2, Index3{2, 1, 1}, 1.0, Point{0.0, 0.0, 0.0}, 2);
  g.set_label(Index3{0, 0, 0}, 1);
  g.set_label(Index3{1, 0, 0}, 2);
  return g;
}

GridCluster flat_interface(int n) {
  GridCluster g = square_grid(n, 0.0, 1.0, 2);
  const int b = n / 32;
  const int s = n / 8;
  fill(g, [&](int x, int y) {
    if (in_rect(x, y, b, b + s, b, b + s)) return 2;
    return y < n / 2 ? 1 : 0;
  });
  return g;
}

GridCluster disk_cells(int n, double radius_cells) {
  GridCluster g = square_grid(n, 0.0, 1.0, 1);
  const double c = 0.5 * n;
  fill(g, [&](int x, int y) {
    const double dx = x + 0.5 - c;
    const double dy = y + 0.5 - c;
    return dx * dx + dy * dy <= radius_cells * radius_cells ? 1 : 0;
  });
  return g;
}

GridCluster nested_annuli() {
  GridCluster g = square_grid(64, 0.0, 1.0, 3);
  fill(g, [](int x, int y) {
    if (in_rect(x, y, 24, 40, 24, 40)) return 1;
    if (in_rect(x, y, 16, 48, 16, 48)) return 2;
    if (in_rect(x, y, 8, 56, 8, 56)) return 3;
    return 0;
  });
  return g;
}

GridCluster quadrant(int n) {
  GridCluster g = square_grid(n, 0.0, 1.0, 3);
  const int h = n / 2;
  fill(g, [&](int x, int y) {
    if (y < h) return 1;
    return x < h ? 2 : 3;
  });
  return g;
}

GridCluster unit_disk(int n) {
  GridCluster g = square_grid(n, -1.5, 1.5, 1);
  fill(g, [&](int x, int y) {
    const Point p = g.cell_center(Index3{x, y, 0});
    return p[0] * p[0] + p[1] * p[1] <= 1.0 ? 1 : 0;
  });
  return g;
}

GridCluster vertical_interface(int n) {
  GridCluster g = square_grid(n, 0.0, 1.0, 2);
  fill(g, [&](int x, int) { return x < n / 2 ? 1 : 2; });
  return g;
}

GridCluster flat_interface_3d(int n) {
  GridCluster g(3, Index3{n, n, n}, 1.0 / n, Point{0.0, 0.0, 0.0}, 1);
  for (int z = 0; z < n / 2; ++z)
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) g.set_label(Index3{x, y, z}, 1);
  return g;
}

std::vector<Inclusion> inclusions() {
  struct Planted {
    const char* name;
    std::vector<std::array<int, 4>> rects;  // x0, x1, y0, y1
  };
  const std::vector<Planted> planted = {
      {"cell_below", {{32, 33, 31, 32}}},
      {"cell_above", {{32, 33, 32, 33}}},
      {"cell_deep", {{30, 31, 27, 28}}},
      {"block_2x2", {{31, 33, 31, 33}}},
      {"bar_3x1", {{31, 34, 31, 32}}},
      {"column_1x3", {{33, 34, 30, 33}}},
      {"ell_3", {{30, 32, 31, 32}, {30, 31, 32, 33}}},
      {"slab_20x1", {{22, 42, 31, 32}}},
      {"slab_20x2", {{22, 42, 31, 33}}},
      {"slab_through", {{0, 64, 31, 32}}},
  };
  std::vector<Inclusion> out;
  for (const Planted& s : planted) {
    GridCluster g = square_grid(64, 0.0, 1.0, 3);
    fill(g, [&](int x, int y) {
      for (const auto& r : s.rects)
        if (in_rect(x, y, r[0], r[1], r[2], r[3])) return 3;
      return in_rect(x, y, 8, 56, 8, 32) ? 1 : 2;
    });
    out.push_back(Inclusion{s.name, std::move(g)});
  }
  return out;
}

GridCluster random_two_chamber(std::uint64_t seed, int n) {
  GridCluster g = square_grid(n, 0.0, 1.0, 2);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.1 * n, 0.9 * n);
  std::uniform_real_distribution<double> rad(0.05 * n, 0.25 * n);
  struct Disk {
    double x, y, r;
    int label;
  };
  std::vector<Disk> disks;
  for (int k = 0; k < 6; ++k) disks.push_back(Disk{pos(rng), pos(rng), rad(rng), 1 + k % 2});
  fill(g, [&](int x, int y) {
    int l = 0;
    for (const Disk& d : disks) {
      const double dx = x + 0.5 - d.x;
      const double dy = y + 0.5 - d.y;
      if (dx * dx + dy * dy <= d.r * d.r) l = d.label;
    }
    return l;
  });
  return g;
}

GridCluster by_name(const std::string& name) {
  static const std::map<std::string, std::function<GridCluster()>> table = {
      {"two_squares", [] { return two_squares(); }},
      {"flat_interface", [] { return flat_interface(); }},
      {"curved_interface", [] { return disk_cells(); }},
      {"nested_annuli", [] { return nested_annuli(); }},
      {"quadrant", [] { return quadrant(); }},
      {"unit_disk", [] { return unit_disk(); }},
      {"vertical_interface", [] { return vertical_interface(); }},
      {"flat_interface_3d", [] { return flat_interface_3d(); }},
  };
  const auto it = table.find(name);
  if (it != table.end()) return it->second();
  for (Inclusion& inc : inclusions())
    if (inc.name == name) return std::move(inc.cluster);
  fail(ErrorCode::InvalidArgument, "unknown fixture " + name);
}

std::vector<std::string> names() {
  std::vector<std::string> out = {"two_squares",   "flat_interface", "curved_interface",   "nested_annuli",
          "quadrant",      "unit_disk",      "vertical_interface", "flat_interface_3d"};
  for (const Inclusion& inc : inclusions()) out.push_back(inc.name);
  return out;
}

}  // namespace epsbeta::fixtures
