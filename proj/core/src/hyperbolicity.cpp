#include "hyperpc/hyperbolicity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hyperpc/errors.hpp"
#include "hyperpc/parallel.hpp"
#include "hyperpc/random.hpp"

namespace hyperpc {

DistanceMatrix::DistanceMatrix(Eigen::MatrixXd d) : d_(std::move(d)) {
  if (d_.rows() != d_.cols()) throw InvalidInput("distance matrix is not square");
  for (Eigen::Index i = 0; i < d_.rows(); ++i) {
    if (d_(i, i) != 0.0) throw InvalidInput("distance matrix has a non-zero diagonal entry");
    for (Eigen::Index j = 0; j < d_.cols(); ++j) {
      const double v = d_(i, j);
      if (!std::isfinite(v) || v < 0.0) throw InvalidInput("distance matrix entries must be finite and non-negative");
      if (v != d_(j, i)) throw InvalidInput("distance matrix is not symmetric");
    }
  }
}

DistanceMatrix DistanceMatrix::subset(const std::vector<std::size_t>& idx) const {
  Eigen::MatrixXd sub(idx.size(), idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = 0; b < idx.size(); ++b)
      sub(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = (*this)(idx[a], idx[b]);
  return DistanceMatrix(std::move(sub));
}

DistanceMatrix pairwise_distances(const std::vector<Vec>& points, const Metric& metric) {
  const std::size_t n = points.size();
  if (n < 2) throw InvalidInput("need at least two points for pairwise distances");
  for (const auto& p : points) {
    if (p.size() != points.front().size()) throw InvalidInput("points have mixed dimensions");
  }
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);

  if (metric.kind == Metric::Kind::Euclidean) {
    parallel_for(n, [&](std::size_t i) {
      for (std::size_t j = i + 1; j < n; ++j) d(i, j) = (points[i] - points[j]).norm();
    });
  } else {
    if (!metric.curvature) throw InvalidInput("hyperbolic metric requires a curvature");
    std::vector<BallPoint> ball;
    ball.reserve(n);
    for (const auto& p : points) ball.push_back(project_to_ball(p, *metric.curvature, metric.eps));
    parallel_for(n, [&](std::size_t i) {
      for (std::size_t j = i + 1; j < n; ++j) d(i, j) = geodesic_distance(ball[i], ball[j]);
    });
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d(j, i) = d(i, j);
  return DistanceMatrix(std::move(d));
}

double gromov_delta(const DistanceMatrix& dm, std::size_t base) {
  const std::size_t n = dm.size();
  if (base >= n) throw InvalidInput("base index out of range");

  Eigen::MatrixXd gp(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) gp(i, j) = 0.5 * (dm(i, base) + dm(j, base) - dm(i, j));

  // Row i of the max-min product; the max reduction is order-independent.
  // gp is symmetric, so row i is read as column i (contiguous).
  std::vector<double> row_delta(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    const auto gi = gp.col(static_cast<Eigen::Index>(i));
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      // min and max are exact, so the packet reduction order does not matter.
      const double best = gi.cwiseMin(gp.col(static_cast<Eigen::Index>(j))).maxCoeff();
      worst = std::max(worst, best - gi[static_cast<Eigen::Index>(j)]);
    }
    row_delta[i] = worst;
  });
  return *std::max_element(row_delta.begin(), row_delta.end());
}

double four_point_delta(const DistanceMatrix& dm) {
  const std::size_t n = dm.size();
  std::vector<double> row_delta(n, 0.0);
  parallel_for(n, [&](std::size_t a) {
    double worst = 0.0;
    for (std::size_t b = a + 1; b < n; ++b)
      for (std::size_t c = b + 1; c < n; ++c)
        for (std::size_t d = c + 1; d < n; ++d) {
          double s[3] = {dm(a, b) + dm(c, d), dm(a, c) + dm(b, d), dm(a, d) + dm(b, c)};
          std::sort(s, s + 3);
          worst = std::max(worst, 0.5 * (s[2] - s[1]));
        }
    row_delta[a] = worst;
  });
  return *std::max_element(row_delta.begin(), row_delta.end());
}

std::size_t max_distance_sum_index(const DistanceMatrix& dm) {
  std::size_t best = 0;
  double best_sum = -1.0;
  for (std::size_t i = 0; i < dm.size(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < dm.size(); ++j) sum += dm(i, j);
    if (sum > best_sum) {
      best_sum = sum;
      best = i;
    }
  }
  return best;
}

DeltaReport sampled_delta(const DistanceMatrix& dm, std::size_t batch_size, std::size_t n_batches,
                          std::uint64_t seed) {
  if (batch_size < 4) throw InvalidInput("batch size must be at least 4");
  if (n_batches < 1) throw InvalidInput("need at least one batch");
  const std::size_t n = dm.size();
  if (n < 2) throw InvalidInput("need at least two points");

  DeltaReport report;
  if (n <= batch_size) {
    report.exact = true;
    report.batches = 1;
    report.samples_per_batch = n;
    report.base_point = max_distance_sum_index(dm);
    report.delta = gromov_delta(dm, report.base_point);
    report.diameter = dm.diameter();
    report.delta_rel = report.diameter > 0.0 ? 2.0 * report.delta / report.diameter : 0.0;
    if (n <= kFourPointLimit) report.four_point_delta = four_point_delta(dm);
    return report;
  }

  Rng rng(seed);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  double delta_sum = 0.0, diam_sum = 0.0, rel_sum = 0.0, four_point_max = 0.0;
  for (std::size_t b = 0; b < n_batches; ++b) {
    // Partial Fisher-Yates: the first batch_size entries form a uniform subset.
    for (std::size_t i = 0; i < batch_size; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
      std::swap(all[i], all[j]);
    }
    std::vector<std::size_t> idx(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(batch_size));
    std::sort(idx.begin(), idx.end());
    const DistanceMatrix sub = dm.subset(idx);
    const std::size_t base = max_distance_sum_index(sub);
    const double delta = gromov_delta(sub, base);
    const double diam = sub.diameter();
    delta_sum += delta;
    diam_sum += diam;
    rel_sum += diam > 0.0 ? 2.0 * delta / diam : 0.0;
    report.base_point = idx[base];
    if (batch_size <= kFourPointLimit) four_point_max = std::max(four_point_max, four_point_delta(sub));
  }
  const auto nb = static_cast<double>(n_batches);
  report.delta = delta_sum / nb;
  report.diameter = diam_sum / nb;
  report.delta_rel = rel_sum / nb;
  report.batches = n_batches;
  report.samples_per_batch = batch_size;
  if (batch_size <= kFourPointLimit) report.four_point_delta = four_point_max;
  return report;
}

DeltaReport sampled_delta(const std::vector<Vec>& points, const Metric& metric, std::size_t batch_size,
                          std::size_t n_batches, std::uint64_t seed) {
  return sampled_delta(pairwise_distances(points, metric), batch_size, n_batches, seed);
}

}  // namespace hyperpc
