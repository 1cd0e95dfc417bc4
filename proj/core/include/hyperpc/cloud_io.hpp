#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hyperpc/point_cloud.hpp"

namespace hyperpc {

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

/// Parses a whole token as a finite double; false on any trailing garbage.
bool parse_double(std::string_view token, double& out);

/// ASCII XYZ: one "x y z" triple per line, '#' starts a comment, blank lines
/// ignored. Throws ParseError with the offending line, IoError if unreadable.
PointCloud read_xyz(const std::filesystem::path& path);
void write_xyz(const std::filesystem::path& path, const PointCloud& cloud, const std::string& header_comment = {});

/// ASCII PLY holding a vertex element with x, y, z properties. Other elements
/// and vertex properties are skipped; a message for each skipped element is
/// appended to `warnings`.
PointCloud read_ply(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

/// Dispatches on extension: .ply is read as PLY, anything else as XYZ.
PointCloud read_cloud(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

}  // namespace hyperpc
