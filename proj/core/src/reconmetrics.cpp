#include "hyperpc/reconmetrics.hpp"

#include <cmath>
#include <vector>

#include "hyperpc/chamfer.hpp"
#include "hyperpc/errors.hpp"

namespace hyperpc {
namespace {

struct OneWay {
  double mean;
  double within;
};

OneWay summarize(const std::vector<double>& dist, double threshold) {
  double sum = 0.0;
  std::size_t hits = 0;
  for (double d : dist) {
    sum += d;
    if (d <= threshold) ++hits;
  }
  const auto n = static_cast<double>(dist.size());
  return {sum / n, static_cast<double>(hits) / n};
}

}  // namespace

MetricsReport evaluate(const PointCloud& pred, const PointCloud& gt, double threshold) {
  if (!(threshold > 0.0) || !std::isfinite(threshold)) throw InvalidInput("threshold must be positive and finite");
  const OneWay forward = summarize(nearest_distances(pred, gt), threshold);
  const OneWay backward = summarize(nearest_distances(gt, pred), threshold);

  MetricsReport r;
  r.threshold = threshold;
  r.acc = forward.mean;
  r.comp = backward.mean;
  r.cd = r.acc + r.comp;
  r.prec = forward.within;
  r.recall = backward.within;
  r.f1 = (r.prec + r.recall) > 0.0 ? 2.0 * r.prec * r.recall / (r.prec + r.recall) : 0.0;
  return r;
}

}  // namespace hyperpc
