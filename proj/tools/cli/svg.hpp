#pragma once

#include <string>
#include <vector>

#include "hyperpc/embedopt.hpp"

namespace hyperpc::cli {

inline constexpr int kSvgSize = 1000;
inline constexpr double kDiskRadiusPx = 470.0;

/// Poincare-disk scatter: unit circle, one marker per sample, colour by
/// category (in `categories` order), circle for wholes and square for parts.
/// `description` lands in the <desc> element, XML-escaped.
std::string render_disk_svg(const std::vector<DiskPoint>& points, const std::vector<std::string>& categories,
                            const std::string& description);

}  // namespace hyperpc::cli
