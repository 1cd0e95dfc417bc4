#include "hyperpc/chamfer.hpp"

#include <cmath>
#include <limits>

#include "hyperpc/kdtree.hpp"
#include "hyperpc/parallel.hpp"

namespace hyperpc {
namespace {

double pointwise(double squared, ChamferVariant variant) {
  return variant == ChamferVariant::L1 ? std::sqrt(squared) : squared;
}

// Fixed-order mean so results do not depend on thread partitioning.
double ordered_mean(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::vector<double> indexed_one_way(const PointCloud& from, const PointCloud& to, ChamferVariant variant) {
  const NNIndex index(to);
  std::vector<double> out(from.size());
  parallel_for(from.size(), [&](std::size_t i) { out[i] = pointwise(index.nearest(from[i]).squared_distance, variant); });
  return out;
}

std::vector<BallPoint> to_ball(const PointCloud& cloud, Curvature curv, double eps) {
  std::vector<BallPoint> out;
  out.reserve(cloud.size());
  for (const auto& p : cloud) out.push_back(project_to_ball(Vec(p), curv, eps));
  return out;
}

struct HyperMatch {
  std::size_t index;
  double distance;
};

std::vector<HyperMatch> hyper_one_way(const std::vector<BallPoint>& from, const std::vector<BallPoint>& to) {
  std::vector<HyperMatch> out(from.size());
  parallel_for(from.size(), [&](std::size_t i) {
    HyperMatch best{0, std::numeric_limits<double>::infinity()};
    for (std::size_t j = 0; j < to.size(); ++j) {
      const double d = geodesic_distance(from[i], to[j]);
      if (d < best.distance) best = {j, d};
    }
    out[i] = best;
  });
  return out;
}

double match_mean(const std::vector<HyperMatch>& matches) {
  double sum = 0.0;
  for (const auto& m : matches) sum += m.distance;
  return sum / static_cast<double>(matches.size());
}

}  // namespace

std::vector<double> nearest_distances(const PointCloud& from, const PointCloud& to) {
  return indexed_one_way(from, to, ChamferVariant::L1);
}

double chamfer_distance(const PointCloud& x, const PointCloud& y, ChamferVariant variant) {
  return ordered_mean(indexed_one_way(x, y, variant)) + ordered_mean(indexed_one_way(y, x, variant));
}

double chamfer_distance_brute_force(const PointCloud& x, const PointCloud& y, ChamferVariant variant) {
  auto one_way = [variant](const PointCloud& from, const PointCloud& to) {
    std::vector<double> out(from.size());
    for (std::size_t i = 0; i < from.size(); ++i) {
      out[i] = pointwise(brute_force_nearest(to, from[i]).squared_distance, variant);
    }
    return ordered_mean(out);
  };
  return one_way(x, y) + one_way(y, x);
}

double hyper_chamfer(const PointCloud& x, const PointCloud& y, Curvature curv, double eps) {
  const auto bx = to_ball(x, curv, eps);
  const auto by = to_ball(y, curv, eps);
  return match_mean(hyper_one_way(bx, by)) + match_mean(hyper_one_way(by, bx));
}

HyperChamferGradient hyper_chamfer_with_gradient(const PointCloud& x, const PointCloud& y, Curvature curv,
                                                 double eps) {
  const auto bx = to_ball(x, curv, eps);
  const auto by = to_ball(y, curv, eps);
  const auto xy = hyper_one_way(bx, by);
  const auto yx = hyper_one_way(by, bx);

  HyperChamferGradient out{match_mean(xy) + match_mean(yx), std::vector<Point3>(x.size(), Point3::Zero()),
                           std::vector<Point3>(y.size(), Point3::Zero())};

  // Accumulate in ball coordinates, then pull back through the projection.
  std::vector<Vec> gx(x.size(), Vec::Zero(3));
  std::vector<Vec> gy(y.size(), Vec::Zero(3));
  const double wx = 1.0 / static_cast<double>(x.size());
  const double wy = 1.0 / static_cast<double>(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto [da, db] = geodesic_distance_grad(bx[i], by[xy[i].index]);
    gx[i] += wx * da;
    gy[xy[i].index] += wx * db;
  }
  for (std::size_t j = 0; j < y.size(); ++j) {
    auto [da, db] = geodesic_distance_grad(by[j], bx[yx[j].index]);
    gy[j] += wy * da;
    gx[yx[j].index] += wy * db;
  }
  for (std::size_t i = 0; i < x.size(); ++i) out.grad_x[i] = project_to_ball_vjp(Vec(x[i]), gx[i], curv, eps);
  for (std::size_t j = 0; j < y.size(); ++j) out.grad_y[j] = project_to_ball_vjp(Vec(y[j]), gy[j], curv, eps);
  return out;
}

}  // namespace hyperpc
