#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace hyperpc {

using Point3 = Eigen::Vector3d;

/// Ordered, non-empty list of finite 3-D points.
class PointCloud {
 public:
  /// Throws InvalidInput if points is empty or holds a non-finite coordinate.
  explicit PointCloud(std::vector<Point3> points);

  std::size_t size() const noexcept { return points_.size(); }
  const Point3& operator[](std::size_t i) const noexcept { return points_[i]; }
  const std::vector<Point3>& points() const noexcept { return points_; }

  auto begin() const noexcept { return points_.begin(); }
  auto end() const noexcept { return points_.end(); }

 private:
  std::vector<Point3> points_;
};

/// Squared Euclidean distance with a fixed evaluation order; every nearest
/// neighbour search in the library goes through this so that indexed and
/// exhaustive searches produce identical values.
inline double squared_distance(const Point3& a, const Point3& b) noexcept {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace hyperpc
