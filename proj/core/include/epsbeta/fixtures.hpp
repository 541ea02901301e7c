#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "epsbeta/grid_cluster.hpp"

namespace epsbeta::fixtures {

/// Two unit squares side by side, labels 1 and 2, spacing 1.
GridCluster two_squares();

/// n x n grid on [0,1]^2: chamber 1 fills y < 1/2 and chamber 2 is a block
/// of side n/8 near the lower-left corner, away from the interface.
GridCluster flat_interface(int n = 256);

/// Disk of `radius_cells` cells centred on an n x n grid over [0,1]^2.
GridCluster disk_cells(int n = 256, double radius_cells = 100.0);

/// Three nested square annuli on a 64 x 64 grid over [0,1]^2 (chamber 1
/// innermost); only consecutive chambers touch.
GridCluster nested_annuli();

/// Chamber 1 on x < 1/2 below y = 1/2, chamber 2 above it, chamber 1 again
/// on the lower right and the foreign chamber 3 on the upper-right quadrant.
GridCluster quadrant(int n = 64);

/// Unit-radius disk centred at the origin on an n x n grid over [-1.5,1.5]^2.
GridCluster unit_disk(int n = 300);

/// Chamber 1 on x < 1/2, chamber 2 on x >= 1/2, 64 x 64 over [0,1]^2.
GridCluster vertical_interface(int n = 64);

/// Flat interface in 3D: chamber 1 below z = 1/2 on an n^3 grid.
GridCluster flat_interface_3d(int n = 32);

/// Inclusion fixtures for the absorption step: chamber 1 is the sealed block
/// [8,56) x [8,32), chamber 2 everything else, label 3 the planted material.
/// The interface point is (1/2, 1/2).
struct Inclusion {
  std::string name;
  GridCluster cluster;
};
std::vector<Inclusion> inclusions();

/// Random two-chamber cluster on n x n over [0,1]^2 (deterministic in seed).
GridCluster random_two_chamber(std::uint64_t seed, int n = 64);

/// Named lookup for the command line, inclusions included (throws InvalidArgument).
GridCluster by_name(const std::string& name);
std::vector<std::string> names();

}  // namespace epsbeta::fixtures
