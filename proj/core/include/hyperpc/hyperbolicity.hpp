#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "hyperpc/hypergeo.hpp"

namespace hyperpc {

/// Symmetric, non-negative, zero-diagonal matrix of pairwise distances.
class DistanceMatrix {
 public:
  /// Validates symmetry (exact), zero diagonal, finiteness and non-negativity.
  explicit DistanceMatrix(Eigen::MatrixXd d);

  std::size_t size() const noexcept { return static_cast<std::size_t>(d_.rows()); }
  double operator()(std::size_t i, std::size_t j) const noexcept {
    return d_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Eigen::MatrixXd& matrix() const noexcept { return d_; }
  double diameter() const noexcept { return d_.maxCoeff(); }

  /// Sub-matrix over the given indices.
  DistanceMatrix subset(const std::vector<std::size_t>& idx) const;

 private:
  Eigen::MatrixXd d_;
};

struct Metric {
  enum class Kind { Euclidean, Hyperbolic } kind = Kind::Euclidean;
  std::optional<Curvature> curvature;  // required for Hyperbolic
  double eps = kDefaultEps;

  static Metric euclidean() { return {}; }
  static Metric hyperbolic(Curvature c, double eps = kDefaultEps) { return {Kind::Hyperbolic, c, eps}; }
};

/// Exact pairwise distances. The hyperbolic metric projects points into the
/// ball first. Throws InvalidInput for fewer than two points, mixed
/// dimensions, or a hyperbolic metric without curvature.
DistanceMatrix pairwise_distances(const std::vector<Vec>& points, const Metric& metric);

/// Gromov delta for a fixed base point via the max-min product of the Gromov
/// product matrix. Throws InvalidInput if base >= n.
double gromov_delta(const DistanceMatrix& dm, std::size_t base);

/// Four-point delta maximised over every quadruple: half the gap between the
/// largest and second largest of the three pair sums. O(n^4).
double four_point_delta(const DistanceMatrix& dm);

/// Index of the point with the largest distance sum (lowest index on ties).
std::size_t max_distance_sum_index(const DistanceMatrix& dm);

struct DeltaReport {
  double delta = 0.0;      // mean over batches
  double diameter = 0.0;   // mean subset diameter
  double delta_rel = 0.0;  // mean of 2 delta / diameter per batch
  std::size_t base_point = 0;  // base of the last batch, as an index into the input
  std::size_t batches = 0;
  std::size_t samples_per_batch = 0;
  bool exact = false;  // true when every point was used (fewer points than batch_size)
  std::optional<double> four_point_delta;  // exhaustive check, when the subset has <= 256 points
};

inline constexpr std::size_t kFourPointLimit = 256;

/// Mean fixed-base delta over n_batches seeded uniform subsets of batch_size
/// points. With n <= batch_size the computation runs once on all points.
DeltaReport sampled_delta(const DistanceMatrix& dm, std::size_t batch_size, std::size_t n_batches,
                          std::uint64_t seed);
DeltaReport sampled_delta(const std::vector<Vec>& points, const Metric& metric, std::size_t batch_size,
                          std::size_t n_batches, std::uint64_t seed);

}  // namespace hyperpc
