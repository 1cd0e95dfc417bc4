#include "hyperpc/losses.hpp"

#include <algorithm>
#include <cmath>

#include "hyperpc/errors.hpp"

namespace hyperpc {
namespace {

// sigmoid(+-36) is representable as strictly inside (0, 1), so clamping the
// logit there keeps the margin strictly inside (0, gamma0).
constexpr double kLogitClamp = 36.0;

struct MarginEval {
  double gamma;
  double dgamma_dlogit;  // zero once the logit is clamped
};

MarginEval eval_margin(const Vec& features, const MarginHead& head) {
  const double logit = head.weights.dot(features) + head.bias;
  const double clamped = std::clamp(logit, -kLogitClamp, kLogitClamp);
  const double s = 1.0 / (1.0 + std::exp(-clamped));
  double gamma = head.gamma0 * s;
  gamma = std::clamp(gamma, std::nextafter(0.0, 1.0), std::nextafter(head.gamma0, 0.0));
  const double slope = (logit == clamped) ? head.gamma0 * s * (1.0 - s) : 0.0;
  return {gamma, slope};
}

double reg_norm_value(const BallPoint& x, RegNorm norm) {
  return norm == RegNorm::Hyperbolic ? hyperbolic_norm(x) : x.coords().norm();
}

Vec reg_norm_grad(const BallPoint& x, RegNorm norm) {
  if (norm == RegNorm::Hyperbolic) return hyperbolic_norm_grad(x);
  const double r = x.coords().norm();
  return r == 0.0 ? Vec::Zero(x.dim()) : Vec(x.coords() / r);
}

Vec concat(const Eigen::Ref<const Vec>& a, const Eigen::Ref<const Vec>& b) {
  Vec out(a.size() + b.size());
  out << a, b;
  return out;
}

}  // namespace

MarginHead MarginHead::zeros(Eigen::Index feature_dim, double gamma0) {
  if (!(gamma0 > 0.0) || !std::isfinite(gamma0)) throw InvalidInput("gamma0 must be positive and finite");
  return MarginHead{Vec::Zero(feature_dim), 0.0, gamma0};
}

double adaptive_margin(const Vec& p_feat, const Vec& w_feat, const MarginHead& head) {
  if (p_feat.size() + w_feat.size() != head.weights.size()) {
    throw InvalidInput("margin head expects " + std::to_string(head.weights.size()) + " features, got " +
                       std::to_string(p_feat.size() + w_feat.size()));
  }
  return eval_margin(concat(p_feat, w_feat), head).gamma;
}

double reg_loss(const BallPoint& part, const BallPoint& whole, double gamma, int n_points, RegNorm norm) {
  if (!(gamma > 0.0)) throw InvalidInput("margin gamma must be positive");
  if (n_points < 1) throw InvalidInput("n_points must be at least 1");
  if (!(part.curvature() == whole.curvature())) throw InvalidInput("part and whole have different curvature");
  const double z = -reg_norm_value(whole, norm) + reg_norm_value(part, norm) + gamma / n_points;
  return std::max(0.0, z);
}

double tangent_distance(const BallPoint& a, const BallPoint& b) {
  return (log_map_origin(a).coords - log_map_origin(b).coords).norm();
}

double triplet_loss(const BallPoint& w_pos, const BallPoint& p_pos, const BallPoint& p_neg, double margin_eps,
                    TripletMetric metric) {
  if (!(margin_eps > 0.0)) throw InvalidInput("triplet margin must be positive");
  auto dist = [metric](const BallPoint& a, const BallPoint& b) {
    return metric == TripletMetric::Tangent ? tangent_distance(a, b) : geodesic_distance(a, b);
  };
  return std::max(0.0, dist(w_pos, p_pos) - dist(w_pos, p_neg) + margin_eps);
}

LossReport total_loss(double l_z, double l_t, double l_n_external) {
  if (!(l_z >= 0.0) || !(l_t >= 0.0)) throw InvalidInput("l_z and l_t must be non-negative");
  return LossReport{l_z, l_t, l_n_external, l_n_external + l_z + l_t};
}

BallPoint EmbeddingState::ball_point(std::size_t row) const {
  return project_to_ball(table.row(static_cast<Eigen::Index>(row)).transpose(), curvature, eps);
}

LossGradients loss_gradients(const Batch& batch, const EmbeddingState& state, const LossOptions& options,
                             double l_n_external) {
  if (batch.pairs.empty() && batch.triplets.empty()) throw InvalidInput("empty batch");
  const std::size_t n = state.size();
  const Eigen::Index d = state.dim();
  if (state.head.weights.size() != 2 * d) throw InvalidInput("margin head width does not match 2 * embedding dim");
  auto check = [n](std::size_t i) {
    if (i >= n) throw InvalidInput("batch references sample row " + std::to_string(i) + " out of range");
  };
  for (const auto& p : batch.pairs) {
    check(p.part);
    check(p.whole);
    if (p.n_points < 1) throw InvalidInput("pair with n_points < 1");
  }
  for (const auto& t : batch.triplets) {
    check(t.anchor);
    check(t.positive);
    check(t.negative);
  }

  std::vector<BallPoint> ball;
  ball.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ball.push_back(state.ball_point(i));

  LossGradients out;
  out.d_table = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), d);
  out.d_weights = Vec::Zero(2 * d);

  // Gradients are accumulated in ball coordinates and pulled back through
  // the projection once per row at the end.
  Eigen::MatrixXd d_ball = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), d);
  auto add_row = [](Eigen::MatrixXd& m, std::size_t row, const Vec& g) {
    m.row(static_cast<Eigen::Index>(row)) += g.transpose();
  };

  double lz_sum = 0.0;
  if (!batch.pairs.empty()) {
    const double w = 1.0 / static_cast<double>(batch.pairs.size());
    for (const auto& p : batch.pairs) {
      const Vec u_part = state.table.row(static_cast<Eigen::Index>(p.part)).transpose();
      const Vec u_whole = state.table.row(static_cast<Eigen::Index>(p.whole)).transpose();
      const Vec features = concat(u_part, u_whole);
      const MarginEval margin = eval_margin(features, state.head);
      const double z = -reg_norm_value(ball[p.whole], options.reg_norm) +
                       reg_norm_value(ball[p.part], options.reg_norm) + margin.gamma / p.n_points;
      if (!(z > 0.0)) continue;
      lz_sum += z;

      add_row(d_ball, p.part, w * reg_norm_grad(ball[p.part], options.reg_norm));
      add_row(d_ball, p.whole, -w * reg_norm_grad(ball[p.whole], options.reg_norm));

      const double dlogit = w * margin.dgamma_dlogit / p.n_points;
      if (dlogit != 0.0) {
        // Features are the raw parameter rows, so this part skips the projection.
        out.d_table.row(static_cast<Eigen::Index>(p.part)) += dlogit * state.head.weights.head(d).transpose();
        out.d_table.row(static_cast<Eigen::Index>(p.whole)) += dlogit * state.head.weights.tail(d).transpose();
        out.d_weights += dlogit * features;
        out.d_bias += dlogit;
      }
    }
    lz_sum *= w;
  }

  double lt_sum = 0.0;
  if (!batch.triplets.empty()) {
    const double w = 1.0 / static_cast<double>(batch.triplets.size());
    if (options.triplet_metric == TripletMetric::Tangent) {
      std::vector<Vec> tangent(n);
      std::vector<bool> have(n, false);
      auto tan = [&](std::size_t i) -> const Vec& {
        if (!have[i]) {
          tangent[i] = log_map_origin(ball[i]).coords;
          have[i] = true;
        }
        return tangent[i];
      };
      Eigen::MatrixXd d_tan = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), d);
      std::vector<bool> touched(n, false);
      for (const auto& t : batch.triplets) {
        const Vec to_pos = tan(t.anchor) - tan(t.positive);
        const Vec to_neg = tan(t.anchor) - tan(t.negative);
        const double dp = to_pos.norm();
        const double dn = to_neg.norm();
        const double z = dp - dn + options.margin_eps;
        if (!(z > 0.0)) continue;
        lt_sum += z;
        const Vec gp = dp > 0.0 ? Vec(to_pos / dp) : Vec::Zero(d);
        const Vec gn = dn > 0.0 ? Vec(to_neg / dn) : Vec::Zero(d);
        add_row(d_tan, t.anchor, w * (gp - gn));
        add_row(d_tan, t.positive, -w * gp);
        add_row(d_tan, t.negative, w * gn);
        touched[t.anchor] = touched[t.positive] = touched[t.negative] = true;
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (!touched[i]) continue;
        add_row(d_ball, i, log_map_origin_vjp(ball[i], d_tan.row(static_cast<Eigen::Index>(i)).transpose()));
      }
    } else {
      for (const auto& t : batch.triplets) {
        const double dp = geodesic_distance(ball[t.anchor], ball[t.positive]);
        const double dn = geodesic_distance(ball[t.anchor], ball[t.negative]);
        const double z = dp - dn + options.margin_eps;
        if (!(z > 0.0)) continue;
        lt_sum += z;
        auto [ga_p, gp] = geodesic_distance_grad(ball[t.anchor], ball[t.positive]);
        auto [ga_n, gn] = geodesic_distance_grad(ball[t.anchor], ball[t.negative]);
        add_row(d_ball, t.anchor, w * (ga_p - ga_n));
        add_row(d_ball, t.positive, w * gp);
        add_row(d_ball, t.negative, -w * gn);
      }
    }
    lt_sum *= w;
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    if (d_ball.row(row).isZero(0.0)) continue;
    out.d_table.row(row) +=
        project_to_ball_vjp(state.table.row(row).transpose(), d_ball.row(row).transpose(), state.curvature,
                            state.eps)
            .transpose();
  }

  out.report = total_loss(lz_sum, lt_sum, l_n_external);
  return out;
}

}  // namespace hyperpc
