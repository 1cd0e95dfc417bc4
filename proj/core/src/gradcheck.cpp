#include <algorithm>
#include <cmath>

#include "hyperpc/chamfer.hpp"
#include "hyperpc/errors.hpp"
#include "hyperpc/losses.hpp"
#include "hyperpc/random.hpp"

namespace hyperpc {

Vec central_difference(const ScalarFn& fn, const Vec& point, double h) {
  Vec grad(point.size());
  Vec probe = point;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    probe[i] = point[i] + h;
    const double up = fn(probe);
    probe[i] = point[i] - h;
    const double down = fn(probe);
    probe[i] = point[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

double grad_check(const ScalarFn& fn, const Vec& analytic, const Vec& point, double h) {
  if (!(h > 1e-9 && h < 1e-3)) throw InvalidInput("finite-difference step must lie in (1e-9, 1e-3)");
  if (analytic.size() != point.size()) throw InvalidInput("gradient and point have different lengths");
  const Vec numeric = central_difference(fn, point, h);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / std::max(1.0, std::abs(numeric[i])));
  }
  return worst;
}

namespace {

constexpr Eigen::Index kSuiteDim = 4;
constexpr double kKinkGap = 1e-3;

Vec random_in_ball(Rng& rng, Eigen::Index dim, double radius) {
  Vec v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = rng.normal();
  return (radius / v.norm()) * v;
}

// Parameter vector layout: table rows (row-major), then head weights, then bias.
Vec flatten(const EmbeddingState& s) {
  Vec out(s.table.size() + s.head.weights.size() + 1);
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < s.table.rows(); ++r)
    for (Eigen::Index c = 0; c < s.table.cols(); ++c) out[k++] = s.table(r, c);
  out.segment(k, s.head.weights.size()) = s.head.weights;
  out[out.size() - 1] = s.head.bias;
  return out;
}

void unflatten(const Vec& theta, EmbeddingState& s) {
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < s.table.rows(); ++r)
    for (Eigen::Index c = 0; c < s.table.cols(); ++c) s.table(r, c) = theta[k++];
  s.head.weights = theta.segment(k, s.head.weights.size());
  s.head.bias = theta[theta.size() - 1];
}

Vec flatten_gradient(const LossGradients& g) {
  Vec out(g.d_table.size() + g.d_weights.size() + 1);
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < g.d_table.rows(); ++r)
    for (Eigen::Index c = 0; c < g.d_table.cols(); ++c) out[k++] = g.d_table(r, c);
  out.segment(k, g.d_weights.size()) = g.d_weights;
  out[out.size() - 1] = g.d_bias;
  return out;
}

double check_state(const Batch& batch, const EmbeddingState& base, const LossOptions& options, double h,
                   bool flip_sign) {
  Vec analytic = flatten_gradient(loss_gradients(batch, base, options));
  if (flip_sign) analytic = -analytic;
  EmbeddingState probe = base;
  const ScalarFn fn = [&](const Vec& theta) {
    unflatten(theta, probe);
    return loss_gradients(batch, probe, options).report.total;
  };
  return grad_check(fn, analytic, flatten(base), h);
}

double hypercd_case(Rng& rng, double h, bool flip_sign) {
  const Curvature curv = Curvature::from_c(rng.uniform(0.05, 1.0));
  const double r = curv.ball_radius();
  Vec x = random_in_ball(rng, 3, rng.uniform(0.05, 0.8) * r);
  Vec y = random_in_ball(rng, 3, rng.uniform(0.05, 0.8) * r);
  auto value = [&](const Vec& theta) {
    const PointCloud px({Point3(theta.head<3>())});
    const PointCloud py({Point3(theta.tail<3>())});
    return hyper_chamfer(px, py, curv);
  };
  Vec theta(6);
  theta << x, y;
  const auto g = hyper_chamfer_with_gradient(PointCloud({Point3(x)}), PointCloud({Point3(y)}), curv);
  Vec analytic(6);
  analytic << g.grad_x[0], g.grad_y[0];
  if (flip_sign) analytic = -analytic;
  return grad_check(value, analytic, theta, h);
}

double reg_case(Rng& rng, double h, bool flip_sign) {
  EmbeddingState s;
  s.curvature = Curvature::from_c(rng.uniform(0.05, 1.0));
  const double r = s.curvature.ball_radius();
  const double r_whole = rng.uniform(0.05, 0.6) * r;
  const double r_part = r_whole + rng.uniform(0.05, 0.2) * r;  // hinge active: part outside whole
  s.ids = {"part", "whole"};
  s.table.resize(2, kSuiteDim);
  s.table.row(0) = random_in_ball(rng, kSuiteDim, r_part).transpose();
  s.table.row(1) = random_in_ball(rng, kSuiteDim, r_whole).transpose();
  s.head = MarginHead::zeros(2 * kSuiteDim, rng.uniform(1.0, 20.0));
  for (Eigen::Index i = 0; i < s.head.weights.size(); ++i) s.head.weights[i] = 0.3 * rng.normal();
  s.head.bias = 0.5 * rng.normal();
  const Batch batch{{PairTerm{0, 1, 1 + static_cast<int>(rng.below(8))}}, {}};
  return check_state(batch, s, LossOptions{}, h, flip_sign);
}

double triplet_case(Rng& rng, double h, bool flip_sign) {
  EmbeddingState s;
  s.curvature = Curvature::from_c(rng.uniform(0.05, 1.0));
  const double r = s.curvature.ball_radius();
  s.ids = {"anchor", "positive", "negative"};
  s.table.resize(3, kSuiteDim);
  for (Eigen::Index i = 0; i < 3; ++i) {
    s.table.row(i) = random_in_ball(rng, kSuiteDim, rng.uniform(0.05, 0.7) * r).transpose();
  }
  s.head = MarginHead::zeros(2 * kSuiteDim, 1000.0);
  const double dp = tangent_distance(s.ball_point(0), s.ball_point(1));
  const double dn = tangent_distance(s.ball_point(0), s.ball_point(2));
  LossOptions options;
  options.margin_eps = std::abs(dn - dp) + rng.uniform(0.5, 2.0);
  if (std::abs(dp - dn + options.margin_eps) < kKinkGap) options.margin_eps += 2.0 * kKinkGap;
  const Batch batch{{}, {TripletTerm{0, 1, 2}}};
  return check_state(batch, s, options, h, flip_sign);
}

}  // namespace

GradCheckSummary run_gradient_suite(std::uint64_t seed, int n_cases, double h, bool flip_sign) {
  if (n_cases < 1) throw InvalidInput("gradient suite needs at least one case");
  GradCheckSummary summary;
  summary.worst = {"none", -1, 0.0};
  for (int i = 0; i < n_cases; ++i) {
    Rng rng(mix64(seed + static_cast<std::uint64_t>(i)));
    const GradCheckCase cases[] = {
        {"hyper_chamfer", i, hypercd_case(rng, h, flip_sign)},
        {"reg_loss", i, reg_case(rng, h, flip_sign)},
        {"triplet_loss", i, triplet_case(rng, h, flip_sign)},
    };
    for (const auto& c : cases) {
      if (c.max_rel_error > summary.worst.max_rel_error || summary.worst.index < 0) summary.worst = c;
      summary.cases.push_back(c);
    }
  }
  return summary;
}

}  // namespace hyperpc
