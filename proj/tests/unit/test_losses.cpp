#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "hyperpc/errors.hpp"
#include "hyperpc/losses.hpp"

namespace hyperpc {
namespace {

const Curvature kCurv = Curvature::from_c(0.14);

// Ball point along `axis` whose hyperbolic norm is h.
BallPoint with_hnorm(double h, Eigen::Index dim = 2, Eigen::Index axis = 0, Curvature curv = kCurv) {
  Vec v = Vec::Zero(dim);
  v[axis] = std::tanh(curv.sqrt_c() * h / 2.0) / curv.sqrt_c();
  return BallPoint(v, curv);
}

// Ball point whose origin log-map image is t.
BallPoint from_tangent(const Vec& t, Curvature curv = kCurv) {
  const double n = t.norm();
  if (n == 0.0) return BallPoint::origin(t.size(), curv);
  return BallPoint((std::tanh(curv.sqrt_c() * n) / (curv.sqrt_c() * n)) * t, curv);
}

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

TEST(AdaptiveMargin, ZeroHeadGivesHalfGamma0) {
  const auto head = MarginHead::zeros(6, 1000.0);
  Rng rng(1);
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(adaptive_margin(testing::random_vec(rng, 3), testing::random_vec(rng, 3), head), 500.0);
  }
}

TEST(AdaptiveMargin, RejectsDimensionMismatch) {
  const auto head = MarginHead::zeros(4, 10.0);
  EXPECT_THROW(adaptive_margin(Vec::Zero(3), Vec::Zero(2), head), InvalidInput);
  EXPECT_THROW(MarginHead::zeros(4, 0.0), InvalidInput);
}

TEST(AdaptiveMargin, SaturatesMonotonically) {
  MarginHead head = MarginHead::zeros(2, 1000.0);
  head.weights << 1.0, 0.0;
  double prev = 0.0;
  for (double s : {-50.0, -5.0, 0.0, 1.0, 5.0, 20.0, 40.0, 1e6}) {
    const double g = adaptive_margin(Vec::Constant(1, s), Vec::Zero(1), head);
    EXPECT_GE(g, prev);
    EXPECT_LT(g, 1000.0);
    prev = g;
  }
  EXPECT_GT(prev, 1000.0 * (1.0 - 1e-12));
}

TEST(AdaptiveMargin, RangeAndLipschitzProperty) {
  Rng rng(2);
  for (int i = 0; i < 10000; ++i) {
    MarginHead head = MarginHead::zeros(8, rng.uniform(1.0, 2000.0));
    head.weights = testing::random_vec(rng, 8, rng.uniform(0.0, 3.0));
    head.bias = rng.normal();
    const double scale = rng.uniform() < 0.3 ? 1e3 : 1.0;
    const Vec p = testing::random_vec(rng, 4, scale);
    const Vec w = testing::random_vec(rng, 4, scale);
    const double g = adaptive_margin(p, w, head);
    ASSERT_GT(g, 0.0);
    ASSERT_LT(g, head.gamma0);

    const Vec dp = testing::random_vec(rng, 4, 1e-2);
    const Vec dw = testing::random_vec(rng, 4, 1e-2);
    const double g2 = adaptive_margin(p + dp, w + dw, head);
    Vec dl(8);
    dl << dp, dw;
    ASSERT_LE(std::abs(g2 - g), head.gamma0 * 0.25 * head.weights.norm() * dl.norm() + 1e-9 * head.gamma0);
  }
}

TEST(RegLoss, InactiveHinge) {
  EXPECT_EQ(reg_loss(with_hnorm(1.0), with_hnorm(2.0), 1.0, 2), 0.0);
}

TEST(RegLoss, ActiveHingeArithmetic) {
  EXPECT_NEAR(reg_loss(with_hnorm(1.2), with_hnorm(1.0), 0.9, 3), 0.5, 1e-12);
}

TEST(RegLoss, EqualEmbeddingsGiveMargin) {
  const auto p = with_hnorm(0.7);
  EXPECT_DOUBLE_EQ(reg_loss(p, p, 5.0, 4), 1.25);
}

TEST(RegLoss, EuclideanNormVariant) {
  const BallPoint part(v2(0.5, 0), kCurv);
  const BallPoint whole(v2(0.0, 0.6), kCurv);
  EXPECT_NEAR(reg_loss(part, whole, 1.0, 2, RegNorm::Euclidean), 0.4, 1e-15);
}

TEST(RegLoss, RejectsBadArguments) {
  const auto p = with_hnorm(0.5);
  EXPECT_THROW(reg_loss(p, p, 0.0, 1), InvalidInput);
  EXPECT_THROW(reg_loss(p, p, 1.0, 0), InvalidInput);
  EXPECT_THROW(reg_loss(p, with_hnorm(0.5, 2, 0, Curvature::from_c(1.0)), 1.0, 1), InvalidInput);
}

TEST(RegLoss, MonotoneInPartAndWholeNorms) {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const double hp = rng.uniform(0.0, 3.0);
    const double hw = rng.uniform(0.0, 3.0);
    const double gamma = rng.uniform(0.1, 5.0);
    const double base = reg_loss(with_hnorm(hp), with_hnorm(hw), gamma, 1);
    const double step = 1e-3;
    ASSERT_GE(reg_loss(with_hnorm(hp + step), with_hnorm(hw), gamma, 1), base);
    ASSERT_LE(reg_loss(with_hnorm(hp), with_hnorm(hw + step), gamma, 1), base);
    ASSERT_GE(base, 0.0);
  }
}

TEST(TripletLoss, ArithmeticExample) {
  const auto w = BallPoint::origin(2, kCurv);
  const auto pos = from_tangent(v2(1, 0));
  const auto neg = from_tangent(v2(-3, 0));
  EXPECT_NEAR(tangent_distance(w, pos), 1.0, 1e-12);
  EXPECT_NEAR(tangent_distance(w, neg), 3.0, 1e-12);
  EXPECT_NEAR(triplet_loss(w, pos, neg, 4.0), 2.0, 1e-12);
}

TEST(TripletLoss, CoincidentPositiveAndNegativeGiveMargin) {
  const auto w = from_tangent(v2(0.3, 0.2));
  const auto p = from_tangent(v2(-1.0, 0.5));
  EXPECT_EQ(triplet_loss(w, p, p, 4.0), 4.0);
  EXPECT_EQ(triplet_loss(w, p, p, 4.0, TripletMetric::Geodesic), 4.0);
}

TEST(TripletLoss, InactiveHinge) {
  const auto w = BallPoint::origin(2, kCurv);
  EXPECT_EQ(triplet_loss(w, from_tangent(v2(0.1, 0)), from_tangent(v2(0, 10)), 4.0), 0.0);
}

TEST(TripletLoss, ZeroExactlyWhenSeparatedByMargin) {
  Rng rng(4);
  for (int i = 0; i < 5000; ++i) {
    const auto w = testing::random_ball_point(rng, 3, kCurv);
    const auto p = testing::random_ball_point(rng, 3, kCurv);
    const auto n = testing::random_ball_point(rng, 3, kCurv);
    const double eps = rng.uniform(0.01, 3.0);
    const double l = triplet_loss(w, p, n, eps);
    ASSERT_GE(l, 0.0);
    if (tangent_distance(w, p) + eps <= tangent_distance(w, n)) ASSERT_EQ(l, 0.0);
  }
  EXPECT_THROW(triplet_loss(BallPoint::origin(2, kCurv), BallPoint::origin(2, kCurv), BallPoint::origin(2, kCurv), 0.0),
               InvalidInput);
}

TEST(TotalLoss, Examples) {
  EXPECT_EQ(total_loss(0, 0, 0).total, 0.0);
  EXPECT_EQ(total_loss(0.5, 2.0, 0).total, 2.5);
  const auto r = total_loss(0.5, 2.0, 1.25);
  EXPECT_EQ(r.total, 3.75);
  EXPECT_EQ(r.l_n, 1.25);
  EXPECT_THROW(total_loss(-1e-9, 0, 0), InvalidInput);
  EXPECT_THROW(total_loss(0, -1, 0), InvalidInput);
}

EmbeddingState small_state(Rng& rng, std::size_t rows, Eigen::Index dim, double spread) {
  EmbeddingState s;
  s.curvature = kCurv;
  s.table = Eigen::MatrixXd(static_cast<Eigen::Index>(rows), dim);
  for (Eigen::Index r = 0; r < s.table.rows(); ++r) s.table.row(r) = testing::random_vec(rng, dim, spread).transpose();
  s.head = MarginHead::zeros(2 * dim, 1.0);
  for (std::size_t i = 0; i < rows; ++i) s.ids.push_back("s" + std::to_string(i));
  return s;
}

TEST(LossGradients, InactiveHingesGiveExactZeros) {
  EmbeddingState s;
  s.curvature = kCurv;
  s.table = Eigen::MatrixXd::Zero(4, 2);
  s.table.row(0) = from_tangent(v2(0.8, 0.0)).coords().transpose();   // part
  s.table.row(1) = from_tangent(v2(0.9, 0.0)).coords().transpose();   // whole
  s.table.row(2) = from_tangent(v2(0.0, 1.0)).coords().transpose();   // unused
  s.table.row(3) = from_tangent(v2(-3.0, 0.0)).coords().transpose();  // negative, far from the anchor
  s.head = MarginHead::zeros(4, 0.01);
  s.ids = {"p", "w", "n", "m"};
  Batch b;
  b.pairs.push_back({0, 1, 10});
  b.triplets.push_back({1, 0, 3});
  ASSERT_LT(hyperbolic_norm(s.ball_point(0)) + 0.001, hyperbolic_norm(s.ball_point(1)));
  const auto g = loss_gradients(b, s, LossOptions{1.0});
  EXPECT_EQ(g.report.total, 0.0);
  EXPECT_TRUE(g.d_table.isZero(0.0));
  EXPECT_TRUE(g.d_weights.isZero(0.0));
  EXPECT_EQ(g.d_bias, 0.0);
}

TEST(LossGradients, SingleActivePairSignStructure) {
  EmbeddingState s;
  s.curvature = kCurv;
  s.table = Eigen::MatrixXd::Zero(2, 2);
  s.table.row(0) = with_hnorm(1.5).coords().transpose();
  s.table.row(1) = (Vec(2) << 0.0, with_hnorm(1.0).coords()[0]).finished().transpose();
  s.head = MarginHead::zeros(4, 1.0);
  s.ids = {"p", "w"};
  Batch b;
  b.pairs.push_back({0, 1, 1});
  const auto g = loss_gradients(b, s, LossOptions{});
  const Vec dp = g.d_table.row(0).transpose();
  const Vec dw = g.d_table.row(1).transpose();
  const Vec margin_part = g.d_bias * s.head.weights.head(2);  // zero for a zero head
  EXPECT_TRUE(margin_part.isZero(0.0));
  EXPECT_LT((dp - hyperbolic_norm_grad(s.ball_point(0))).norm(), 1e-12);
  EXPECT_LT((dw + hyperbolic_norm_grad(s.ball_point(1))).norm(), 1e-12);
  EXPECT_NEAR(g.d_bias, 0.25, 1e-15);  // gamma0 * s(1 - s) / N at s = 1/2
}

TEST(LossGradients, MatchesFiniteDifferencesAcrossOptions) {
  Rng rng(5);
  for (auto norm : {RegNorm::Hyperbolic, RegNorm::Euclidean}) {
    for (auto metric : {TripletMetric::Tangent, TripletMetric::Geodesic}) {
      for (int trial = 0; trial < 10; ++trial) {
        EmbeddingState s = small_state(rng, 6, 3, 0.6);
        s.head.weights = testing::random_vec(rng, 6, 0.5);
        s.head.bias = rng.normal();
        s.head.gamma0 = 2.0;
        Batch b;
        b.pairs = {{0, 1, 2}, {2, 3, 1}};
        b.triplets = {{1, 0, 4}, {3, 2, 5}};
        const LossOptions opt{rng.uniform(5.0, 8.0), norm, metric};
        const auto g = loss_gradients(b, s, opt);
        ASSERT_GT(g.report.l_t, 0.0);

        const Eigen::Index nt = s.table.size();
        Vec flat(nt + s.head.weights.size() + 1), grad(flat.size());
        for (Eigen::Index r = 0; r < s.table.rows(); ++r) {
          flat.segment(r * 3, 3) = s.table.row(r).transpose();
          grad.segment(r * 3, 3) = g.d_table.row(r).transpose();
        }
        flat.segment(nt, 6) = s.head.weights;
        grad.segment(nt, 6) = g.d_weights;
        flat[nt + 6] = s.head.bias;
        grad[nt + 6] = g.d_bias;
        const ScalarFn f = [&](const Vec& v) {
          EmbeddingState t = s;
          for (Eigen::Index r = 0; r < t.table.rows(); ++r) t.table.row(r) = v.segment(r * 3, 3).transpose();
          t.head.weights = v.segment(nt, 6);
          t.head.bias = v[nt + 6];
          return loss_gradients(b, t, opt).report.total;
        };
        ASSERT_LT(grad_check(f, grad, flat, 1e-6), 1e-5);
      }
    }
  }
}

TEST(LossGradients, RejectsBadBatches) {
  Rng rng(6);
  const EmbeddingState s = small_state(rng, 3, 2, 0.3);
  EXPECT_THROW(loss_gradients(Batch{}, s, LossOptions{}), InvalidInput);
  Batch oob;
  oob.pairs.push_back({0, 7, 1});
  EXPECT_THROW(loss_gradients(oob, s, LossOptions{}), InvalidInput);
  Batch bad_n;
  bad_n.pairs.push_back({0, 1, 0});
  EXPECT_THROW(loss_gradients(bad_n, s, LossOptions{}), InvalidInput);
}

TEST(GradCheck, QuadraticIsExact) {
  Rng rng(7);
  const Eigen::MatrixXd a = Eigen::MatrixXd::Random(5, 5);
  const Eigen::MatrixXd q = a.transpose() * a;
  const Vec b = testing::random_vec(rng, 5);
  const ScalarFn f = [&](const Vec& x) { return 0.5 * x.dot(q * x) + b.dot(x); };
  const Vec x = testing::random_vec(rng, 5);
  EXPECT_LT(grad_check(f, q * x + b, x, 1e-4), 1e-9);
}

TEST(GradCheck, GeodesicDistanceAtRandomPoints) {
  Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    const auto x = testing::random_ball_point(rng, 3, kCurv);
    const auto y = testing::random_ball_point(rng, 3, kCurv);
    const ScalarFn f = [&](const Vec& v) { return geodesic_distance(BallPoint(v, kCurv), y); };
    ASSERT_LT(grad_check(f, geodesic_distance_grad(x, y).first, x.coords(), 1e-6), 1e-5);
  }
}

TEST(GradCheck, RejectsBadStepAndShape) {
  const ScalarFn f = [](const Vec& x) { return x.sum(); };
  const Vec x = Vec::Ones(3);
  EXPECT_THROW(grad_check(f, x, x, 1e-9), InvalidInput);
  EXPECT_THROW(grad_check(f, x, x, 1e-3), InvalidInput);
  EXPECT_THROW(grad_check(f, Vec::Ones(2), x, 1e-6), InvalidInput);
  EXPECT_NO_THROW(grad_check(f, x, x, 1e-6));
}

TEST(GradientSuite, HundredSeededCasesPass) {
  const auto s = run_gradient_suite(42, 100);
  EXPECT_EQ(s.cases.size(), 300u);
  EXPECT_LT(s.worst.max_rel_error, 1e-5) << s.worst.name << " #" << s.worst.index;
}

TEST(GradientSuite, SignFlipIsDetected) {
  const auto s = run_gradient_suite(42, 5, 1e-6, true);
  EXPECT_GT(s.worst.max_rel_error, 1e-1);
}

TEST(GradientSuite, Deterministic) {
  const auto a = run_gradient_suite(3, 10);
  const auto b = run_gradient_suite(3, 10);
  ASSERT_EQ(a.cases.size(), b.cases.size());
  for (std::size_t i = 0; i < a.cases.size(); ++i) EXPECT_EQ(a.cases[i].max_rel_error, b.cases[i].max_rel_error);
}

}  // namespace
}  // namespace hyperpc
