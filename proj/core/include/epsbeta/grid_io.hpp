#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "epsbeta/grid_cluster.hpp"

namespace epsbeta {

/// 2D clusters as PGM with gray value = label. Row r of the image holds the
/// cells with y index ny-1-r so that the picture is upright. Grid metadata
/// travels in a comment line; plain PGMs load with spacing 1, origin 0 and m
/// equal to the largest gray value.
GridCluster read_pgm(const std::string& path);
void write_pgm(const GridCluster& cluster, const std::string& path, bool binary = true);

/// Raw little-endian u8 labels (x fastest) next to a JSON sidecar holding
/// shape, spacing, origin, m and, when present, the sub-cell overlays.
GridCluster read_raw(const std::string& raw_path, const std::string& sidecar_path);
void write_raw(const GridCluster& cluster, const std::string& raw_path,
               const std::string& sidecar_path);

/// Dispatch on extension: .pgm, .json (sidecar, raw file beside it) or .raw.
GridCluster load_cluster(const std::string& path);
void save_cluster(const GridCluster& cluster, const std::string& path);

/// Sidecar metadata (without the labels).
nlohmann::json sidecar_json(const GridCluster& cluster);
GridCluster cluster_from_sidecar(const nlohmann::json& meta, std::vector<std::uint8_t> labels);

/// Writes a 0/255 mask of a 2D grid as binary PGM (for infiltration dumps).
void write_mask_pgm(const std::vector<std::uint8_t>& mask, const Index3& shape,
                    const std::string& path);

}  // namespace epsbeta
