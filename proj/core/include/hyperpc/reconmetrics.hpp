#pragma once

#include "hyperpc/point_cloud.hpp"

namespace hyperpc {

inline constexpr double kDefaultThreshold = 0.1;

struct MetricsReport {
  double acc = 0.0;     // mean distance pred -> gt
  double comp = 0.0;    // mean distance gt -> pred
  double cd = 0.0;      // acc + comp
  double prec = 0.0;    // fraction of pred within threshold of gt
  double recall = 0.0;  // fraction of gt within threshold of pred
  double f1 = 0.0;
  double threshold = kDefaultThreshold;
};

/// Accuracy, completeness, Chamfer distance, precision, recall and F-score.
/// Distances are Euclidean norms; a point counts as matched when its nearest
/// neighbour lies at distance <= threshold. Throws InvalidInput unless threshold > 0.
MetricsReport evaluate(const PointCloud& pred, const PointCloud& gt, double threshold = kDefaultThreshold);

}  // namespace hyperpc
