#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hyperpc/point_cloud.hpp"

namespace hyperpc {

struct Neighbor {
  std::size_t index;
  double squared_distance;
};

/// Exact Euclidean nearest-neighbour index over a point cloud (KD-tree).
///
/// Queries return the same point as an exhaustive argmin; among equidistant
/// points the lowest index wins.
class NNIndex {
 public:
  explicit NNIndex(const PointCloud& cloud);

  Neighbor nearest(const Point3& query) const;

  std::size_t size() const noexcept { return points_.size(); }

 private:
  struct Node {
    std::uint32_t begin;
    std::uint32_t end;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint8_t axis = 0;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const Point3& q, Neighbor& best) const;

  std::vector<Point3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

/// Exhaustive nearest neighbour with the same tie-breaking as NNIndex.
Neighbor brute_force_nearest(const PointCloud& cloud, const Point3& query);

}  // namespace hyperpc
