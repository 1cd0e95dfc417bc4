#include "hyperpc/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "hyperpc/errors.hpp"

namespace hyperpc {
namespace {

constexpr std::uint32_t kLeafSize = 8;

void consider(std::size_t index, double d2, Neighbor& best) {
  if (d2 < best.squared_distance || (d2 == best.squared_distance && index < best.index)) {
    best = {index, d2};
  }
}

Neighbor no_neighbor() {
  return {std::numeric_limits<std::size_t>::max(), std::numeric_limits<double>::infinity()};
}

}  // namespace

PointCloud::PointCloud(std::vector<Point3> points) : points_(std::move(points)) {
  if (points_.empty()) throw InvalidInput("point cloud is empty");
  for (const auto& p : points_) {
    if (!p.allFinite()) throw InvalidInput("point cloud has a non-finite coordinate");
  }
}

NNIndex::NNIndex(const PointCloud& cloud) : points_(cloud.points()) {
  if (points_.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw InvalidInput("point cloud too large for NNIndex");
  }
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * points_.size() / kLeafSize + 1);
  build(0, static_cast<std::uint32_t>(points_.size()));
}

std::int32_t NNIndex::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return id;

  Point3 lo = points_[order_[begin]];
  Point3 hi = lo;
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  Eigen::Index axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all points coincide

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = points_[a][axis];
                     const double cb = points_[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  const double split = points_[order_[mid]][axis];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  Node& node = nodes_[id];
  node.axis = static_cast<std::uint8_t>(axis);
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

void NNIndex::search(std::int32_t id, const Point3& q, Neighbor& best) const {
  const Node& node = nodes_[id];
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t p = order_[i];
      consider(p, squared_distance(q, points_[p]), best);
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const std::int32_t near = diff < 0.0 ? node.left : node.right;
  const std::int32_t far = diff < 0.0 ? node.right : node.left;
  search(near, q, best);
  // Equality keeps equidistant candidates with a lower index reachable.
  if (diff * diff <= best.squared_distance) search(far, q, best);
}

Neighbor NNIndex::nearest(const Point3& query) const {
  Neighbor best = no_neighbor();
  search(0, query, best);
  return best;
}

Neighbor brute_force_nearest(const PointCloud& cloud, const Point3& query) {
  Neighbor best = no_neighbor();
  for (std::size_t i = 0; i < cloud.size(); ++i) consider(i, squared_distance(query, cloud[i]), best);
  return best;
}

}  // namespace hyperpc
