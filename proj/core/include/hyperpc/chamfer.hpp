#pragma once

#include <vector>

#include "hyperpc/hypergeo.hpp"
#include "hyperpc/point_cloud.hpp"

namespace hyperpc {

enum class ChamferVariant { L1, L2 };

/// Symmetric Chamfer distance. L1 averages nearest-neighbour distances, L2
/// averages squared distances (no final square root). Nearest neighbours come
/// from a KD-tree over each cloud.
double chamfer_distance(const PointCloud& x, const PointCloud& y, ChamferVariant variant);

/// Same quantity by exhaustive search; the reference the indexed version must
/// match bit-for-bit.
double chamfer_distance_brute_force(const PointCloud& x, const PointCloud& y, ChamferVariant variant);

/// Per-point nearest-neighbour distances from `from` into `to` (indexed).
std::vector<double> nearest_distances(const PointCloud& from, const PointCloud& to);

/// Hyperbolic Chamfer distance: both clouds are projected into the ball and
/// the per-point metric is the geodesic distance. Nearest neighbours are found
/// under the hyperbolic metric by exhaustive search.
double hyper_chamfer(const PointCloud& x, const PointCloud& y, Curvature curv, double eps = kDefaultEps);

/// Gradient of hyper_chamfer with respect to every raw input coordinate, with
/// the nearest-neighbour assignment held fixed (exact almost everywhere).
struct HyperChamferGradient {
  double value;
  std::vector<Point3> grad_x;
  std::vector<Point3> grad_y;
};
HyperChamferGradient hyper_chamfer_with_gradient(const PointCloud& x, const PointCloud& y, Curvature curv,
                                                 double eps = kDefaultEps);

}  // namespace hyperpc
