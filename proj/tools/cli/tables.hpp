#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hyperpc/embedopt.hpp"
#include "hyperpc/hyperbolicity.hpp"

namespace hyperpc::cli {

/// Whitespace-separated square matrix, one row per line, '#' comments.
DistanceMatrix read_distance_matrix(const std::filesystem::path& path);

/// Coordinate columns c0..c{d-1} of an embedding CSV as written by `embed`.
std::vector<Vec> read_embedding_csv(const std::filesystem::path& path);

void write_loss_csv(const std::filesystem::path& path, const std::vector<LossReport>& curve,
                    const std::string& config_json);
void write_embedding_csv(const std::filesystem::path& path, const EmbeddingState& state,
                         const HierarchyManifest& manifest, const std::string& config_json);
void write_disk_csv(const std::filesystem::path& path, const std::vector<DiskPoint>& disk,
                    const std::string& config_json);

}  // namespace hyperpc::cli
