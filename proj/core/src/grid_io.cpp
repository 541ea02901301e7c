#include "epsbeta/grid_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace epsbeta {

namespace fs = std::filesystem;

namespace {

std::string read_token(std::istream& in) {
  std::string tok;
  for (;;) {
    int c = in.peek();
    if (c == EOF) return tok;
    if (std::isspace(c)) {
      in.get();
      continue;
    }
    if (c == '#') {
      std::string line;
      std::getline(in, line);
      continue;
    }
    break;
  }
  in >> tok;
  return tok;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int to_int(const std::string& tok, const std::string& path) {
  try {
    return std::stoi(tok);
  } catch (const std::exception&) {
    fail(ErrorCode::IoError, "malformed PGM header in " + path);
  }
}

}  // namespace

GridCluster read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "P2" && magic != "P5") fail(ErrorCode::IoError, path + " is not a P2/P5 PGM");

  // Scan comment lines in the header for our metadata before tokenising.
  double spacing = 1.0;
  Point origin{0.0, 0.0, 0.0};
  int m = -1;
  std::vector<std::string> header;
  while (header.size() < 3) {
    int c = in.peek();
    if (c == EOF) fail(ErrorCode::IoError, "truncated PGM header in " + path);
    if (std::isspace(c)) {
      in.get();
      continue;
    }
    if (c == '#') {
      std::string line;
      std::getline(in, line);
      std::istringstream ss(line.substr(1));
      std::string key;
      while (ss >> key) {
        if (key == "spacing") ss >> spacing;
        else if (key == "origin") ss >> origin[0] >> origin[1];
        else if (key == "m") ss >> m;
      }
      continue;
    }
    header.push_back(read_token(in));
  }
  const int nx = to_int(header[0], path);
  const int ny = to_int(header[1], path);
  const int maxval = to_int(header[2], path);
  if (nx < 1 || ny < 1 || maxval < 1 || maxval > 255)
    fail(ErrorCode::IoError, "unsupported PGM dimensions or maxval in " + path);

  std::vector<std::uint8_t> raster(static_cast<std::size_t>(nx) * ny);
  if (magic == "P5") {
    in.get();  // single whitespace after maxval
    in.read(reinterpret_cast<char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
    if (in.gcount() != static_cast<std::streamsize>(raster.size()))
      fail(ErrorCode::IoError, "truncated PGM data in " + path);
  } else {
    for (auto& v : raster) {
      const std::string tok = read_token(in);
      if (tok.empty()) fail(ErrorCode::IoError, "truncated PGM data in " + path);
      const int value = to_int(tok, path);
      if (value < 0 || value > maxval) fail(ErrorCode::IoError, "PGM value out of range in " + path);
      v = static_cast<std::uint8_t>(value);
    }
  }
  const int max_label = *std::max_element(raster.begin(), raster.end());
  if (m < 0) m = max_label;
  if (max_label > m) fail(ErrorCode::IoError, "PGM labels exceed declared m in " + path);

  GridCluster g(2, Index3{nx, ny, 1}, spacing, origin, m);
  auto& labels = g.mutable_labels();
  for (int r = 0; r < ny; ++r)
    for (int x = 0; x < nx; ++x)
      labels[g.linear(Index3{x, ny - 1 - r, 0})] = raster[static_cast<std::size_t>(r) * nx + x];
  return g;
}

void write_pgm(const GridCluster& g, const std::string& path, bool binary) {
  if (g.dims() != 2) fail(ErrorCode::IoError, "PGM output requires a 2D cluster");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  const int nx = g.shape()[0];
  const int ny = g.shape()[1];
  out << (binary ? "P5" : "P2") << "\n";
  out << "# epsbeta spacing " << fmt(g.spacing()) << " origin " << fmt(g.origin()[0]) << ' '
      << fmt(g.origin()[1]) << " m " << g.m() << "\n";
  out << nx << ' ' << ny << "\n255\n";
  for (int r = 0; r < ny; ++r) {
    for (int x = 0; x < nx; ++x) {
      const Label l = g.label(Index3{x, ny - 1 - r, 0});
      if (binary) out.put(static_cast<char>(l));
      else out << static_cast<int>(l) << (x + 1 < nx ? ' ' : '\n');
    }
  }
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

nlohmann::json sidecar_json(const GridCluster& g) {
  nlohmann::json j;
  nlohmann::json shape = nlohmann::json::array();
  nlohmann::json origin = nlohmann::json::array();
  for (int k = 0; k < g.dims(); ++k) {
    shape.push_back(g.shape()[k]);
    origin.push_back(g.origin()[k]);
  }
  j["shape"] = shape;
  j["spacing"] = g.spacing();
  j["origin"] = origin;
  j["m"] = g.m();
  if (g.has_overlays()) {
    nlohmann::json ov = nlohmann::json::array();
    for (const Overlay& o : g.overlays()) {
      nlohmann::json cols = nlohmann::json::array();
      for (const ColumnProfile& c : o.columns()) {
        nlohmann::json labels = nlohmann::json::array();
        for (Label l : c.labels) labels.push_back(static_cast<int>(l));
        cols.push_back({{"base", {c.base[0], c.base[1], c.base[2]}},
                        {"breakpoints", c.breakpoints},
                        {"labels", labels}});
      }
      ov.push_back({{"axis", o.axis()}, {"z_lo", o.z_lo()}, {"z_hi", o.z_hi()}, {"columns", cols}});
    }
    j["overlay"] = ov;
  }
  return j;
}

GridCluster cluster_from_sidecar(const nlohmann::json& meta, std::vector<std::uint8_t> labels) {
  try {
    const auto& shape = meta.at("shape");
    const int dims = static_cast<int>(shape.size());
    if (dims != 2 && dims != 3) fail(ErrorCode::IoError, "sidecar shape must have 2 or 3 entries");
    Index3 s{1, 1, 1};
    Point origin{0.0, 0.0, 0.0};
    for (int k = 0; k < dims; ++k) s[k] = shape[k].get<int>();
    if (meta.contains("origin"))
      for (std::size_t k = 0; k < meta["origin"].size() && k < 3; ++k)
        origin[k] = meta["origin"][k].get<double>();
    GridCluster g(dims, s, meta.value("spacing", 1.0), origin, meta.at("m").get<int>());
    if (labels.size() != g.cell_count())
      fail(ErrorCode::IoError, "raw size " + std::to_string(labels.size()) +
                                   " does not match shape (" + std::to_string(g.cell_count()) + ")");
    g.mutable_labels() = std::move(labels);
    g.validate();
    if (meta.contains("overlay")) {
      for (const auto& o : meta["overlay"]) {
        const int axis = o.at("axis").get<int>();
        const int z_lo = o.at("z_lo").get<int>();
        const int z_hi = o.at("z_hi").get<int>();
        std::vector<ColumnProfile> cols;
        for (const auto& c : o.at("columns")) {
          ColumnProfile p;
          for (int k = 0; k < 3; ++k) p.base[k] = c.at("base")[k].get<int>();
          p.axis = axis;
          p.lo = z_lo;
          p.hi = z_hi;
          p.breakpoints = c.at("breakpoints").get<std::vector<double>>();
          for (const auto& l : c.at("labels")) p.labels.push_back(static_cast<Label>(l.get<int>()));
          cols.push_back(std::move(p));
        }
        g.add_overlay(Overlay(axis, z_lo, z_hi, std::move(cols)));
      }
    }
    return g;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::IoError, std::string("malformed sidecar: ") + e.what());
  }
}

GridCluster read_raw(const std::string& raw_path, const std::string& sidecar_path) {
  std::ifstream meta_in(sidecar_path);
  if (!meta_in) fail(ErrorCode::IoError, "cannot open " + sidecar_path);
  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::IoError, "sidecar is not JSON: " + std::string(e.what()));
  }
  std::ifstream in(raw_path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + raw_path);
  std::vector<std::uint8_t> labels((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return cluster_from_sidecar(meta, std::move(labels));
}

void write_raw(const GridCluster& g, const std::string& raw_path, const std::string& sidecar_path) {
  {
    std::ofstream out(raw_path, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot write " + raw_path);
    out.write(reinterpret_cast<const char*>(g.labels().data()),
              static_cast<std::streamsize>(g.labels().size()));
    if (!out) fail(ErrorCode::IoError, "write failed for " + raw_path);
  }
  std::ofstream meta(sidecar_path);
  if (!meta) fail(ErrorCode::IoError, "cannot write " + sidecar_path);
  meta << sidecar_json(g).dump(2) << "\n";
}

GridCluster load_cluster(const std::string& path) {
  const fs::path p(path);
  const std::string ext = p.extension().string();
  if (ext == ".pgm") return read_pgm(path);
  if (ext == ".json") {
    fs::path raw = p;
    raw.replace_extension(".raw");
    return read_raw(raw.string(), path);
  }
  if (ext == ".raw") {
    fs::path side = p;
    side.replace_extension(".json");
    return read_raw(path, side.string());
  }
  fail(ErrorCode::IoError, "unrecognised cluster format: " + path);
}

void save_cluster(const GridCluster& g, const std::string& path) {
  const fs::path p(path);
  const std::string ext = p.extension().string();
  if (ext == ".pgm") {
    write_pgm(g, path);
    return;
  }
  fs::path raw = p;
  fs::path side = p;
  raw.replace_extension(".raw");
  side.replace_extension(".json");
  write_raw(g, raw.string(), side.string());
}

void write_mask_pgm(const std::vector<std::uint8_t>& mask, const Index3& shape,
                    const std::string& path) {
  if (shape[2] != 1) fail(ErrorCode::IoError, "mask PGM requires a 2D grid");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  const int nx = shape[0];
  const int ny = shape[1];
  out << "P5\n" << nx << ' ' << ny << "\n255\n";
  for (int r = 0; r < ny; ++r)
    for (int x = 0; x < nx; ++x) {
      const std::size_t k = static_cast<std::size_t>(x) + static_cast<std::size_t>(nx) * (ny - 1 - r);
      out.put(static_cast<char>(mask[k] ? 255 : 0));
    }
}

}  // namespace epsbeta
