#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "epsbeta/epsbeta.hpp"

using namespace epsbeta;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "epsbeta_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Pgm, BinaryRoundTrip) {
  const GridCluster E = fixtures::nested_annuli();
  const auto p = scratch("annuli.pgm").string();
  write_pgm(E, p);
  EXPECT_TRUE(read_pgm(p) == E);
}

TEST(Pgm, AsciiRoundTrip) {
  const GridCluster E = fixtures::random_two_chamber(11, 24);
  const auto p = scratch("random_ascii.pgm").string();
  write_pgm(E, p, false);
  EXPECT_TRUE(read_pgm(p) == E);
}

TEST(Pgm, PlainImageDefaults) {
  const auto p = scratch("plain.pgm");
  {
    std::ofstream out(p);
    out << "P2\n3 2\n2\n0 1 2\n1 1 0\n";
  }
  const GridCluster g = read_pgm(p.string());
  EXPECT_EQ(g.m(), 2);
  EXPECT_EQ(g.spacing(), 1.0);
  EXPECT_EQ(g.shape(), (Index3{3, 2, 1}));
  // First image row is the top of the picture.
  EXPECT_EQ(g.label(Index3{2, 1, 0}), 2);
  EXPECT_EQ(g.label(Index3{2, 0, 0}), 0);
}

TEST(Pgm, LabelsAboveMAreRejected) {
  const auto p = scratch("bad_m.pgm");
  {
    std::ofstream out(p);
    out << "P2\n# epsbeta spacing 1 origin 0 0 0 m 1\n2 1\n3\n1 3\n";
  }
  try {
    read_pgm(p.string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

TEST(Raw, RoundTripKeepsOverlays) {
  const GridCluster V = fixtures::vertical_interface();
  const auto [F, rep] = adjust_in_ball(V, constant_density(), 1, 2, Ball{{0.5, 0.5, 0}, 0.25}, 3e-4);
  ASSERT_TRUE(F.has_overlays());
  const auto raw = scratch("ov.raw").string();
  const auto side = scratch("ov.json").string();
  write_raw(F, raw, side);
  const GridCluster back = read_raw(raw, side);
  EXPECT_TRUE(back == F);
  EXPECT_EQ(weighted_volume(back, constant_density()), weighted_volume(F, constant_density()));
}

TEST(Raw, ThreeDimensional) {
  const GridCluster E = fixtures::flat_interface_3d(8);
  const auto raw = scratch("slab.raw").string();
  const auto side = scratch("slab.json").string();
  write_raw(E, raw, side);
  EXPECT_TRUE(read_raw(raw, side) == E);
  EXPECT_EQ(fs::file_size(raw), E.cell_count());
}

TEST(LoadCluster, DispatchesOnExtension) {
  const GridCluster E = fixtures::two_squares();
  for (const char* name : {"two.pgm", "two.json"}) {
    const auto p = scratch(name).string();
    save_cluster(E, p);
    EXPECT_TRUE(load_cluster(p) == E) << name;
  }
}

TEST(LoadCluster, MissingFileIsAnIoError) {
  try {
    load_cluster(scratch("does_not_exist.pgm").string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

TEST(Sidecar, CarriesGridMetadata) {
  const GridCluster E = fixtures::unit_disk(30);
  const auto meta = sidecar_json(E);
  EXPECT_EQ(meta["m"], 1);
  const GridCluster back = cluster_from_sidecar(meta, E.labels());
  EXPECT_TRUE(back == E);
}

TEST(Report, NonFiniteTags) {
  EXPECT_EQ(finite_or_tag(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(finite_or_tag(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(finite_or_tag(std::nan("")), "nan");
  EXPECT_EQ(finite_or_tag(1.5), 1.5);
}

TEST(Report, CsvKeepsSeventeenDigits) {
  const double third = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format17(third)), third);
  const auto p = scratch("t.csv");
  write_csv(p.string(), {"a", "b"}, {{third, 2.0}, {0.1, 0.2}});
  std::istringstream in(slurp(p));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "a,b");
  std::getline(in, line);
  const auto comma = line.find(',');
  EXPECT_EQ(std::stod(line.substr(0, comma)), third);
  EXPECT_EQ(std::stod(line.substr(comma + 1)), 0.1);
}

TEST(Report, JsonFileParsesBack) {
  const MeasureReport r = measure(fixtures::two_squares(), constant_density());
  const auto p = scratch("m.json");
  write_json(to_json(r), p.string());
  const auto j = nlohmann::json::parse(slurp(p));
  EXPECT_EQ(j["perimeter"], 7.0);
}
