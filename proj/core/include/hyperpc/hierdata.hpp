#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hyperpc/point_cloud.hpp"

namespace hyperpc {

enum class PrimitiveKind { Box, Disk, Cylinder };

/// Box: size = (sx, sy, sz) full extents, centred at the origin.
/// Disk: size.x() = radius, lying in the z = 0 plane.
/// Cylinder: size.x() = radius, size.y() = height, axis along z, centred.
struct Primitive {
  PrimitiveKind kind;
  Eigen::Vector3d size;
};

/// n points uniformly distributed over the primitive's surface (area
/// weighted, caps included for cylinders). Throws InvalidInput for n == 0 or
/// non-positive dimensions.
PointCloud sample_primitive(const Primitive& primitive, std::size_t n, std::uint64_t seed);

enum class Role { Part, Whole };

struct SampleRecord {
  std::string id;
  std::string category;
  Role role = Role::Whole;
  int n_points = 0;
  std::optional<std::string> parent_id;  // parts only
  std::string cloud_path;                // relative to the manifest directory
  std::optional<PointCloud> cloud;
};

struct DatasetConfig {
  int n_categories = 5;
  int objects_per_category = 20;
  int parts_per_object = 3;
  int points_whole = 1024;
  std::uint64_t seed = 42;
};

struct HierarchyManifest {
  std::vector<SampleRecord> samples;
  std::vector<std::string> categories;
  std::uint64_t seed = 0;
  std::optional<DatasetConfig> config;

  /// Checks every documented invariant: unique ids, >= 2 categories, parents
  /// resolve to a whole of the same category, strictly increasing part sizes
  /// within an object, n_points matching the cloud, and point-set containment
  /// P1 c P2 c ... c W when clouds are loaded. Throws InvalidInput.
  void validate() const;

  std::optional<std::size_t> find(const std::string& id) const;
};

/// Category templates in generation order.
const std::vector<std::string>& category_names();

/// Builds the synthetic part-whole dataset. Throws InvalidInput when
/// n_categories is outside [2, 5], parts_per_object < 2, objects_per_category < 1
/// or points_whole is too small to give every part at least one point.
HierarchyManifest generate_dataset(const DatasetConfig& config);

/// Writes clouds/<id>.xyz and manifest.json below out_dir.
void write_dataset(const HierarchyManifest& manifest, const std::filesystem::path& out_dir);

/// Reads manifest.json. With load_clouds the referenced XYZ files are read and
/// the manifest is validated including the subset chain.
HierarchyManifest read_manifest(const std::filesystem::path& manifest_path, bool load_clouds = true);

std::string to_string(Role role);

}  // namespace hyperpc
