#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "hyperpc/errors.hpp"
#include "hyperpc/hypergeo.hpp"
#include "hyperpc/losses.hpp"

namespace hyperpc {
namespace {

using testing::random_ball_point;

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }
Vec v3(double a, double b, double c) { return (Vec(3) << a, b, c).finished(); }

// Closed form d = arcosh(1 + 2c|x-y|^2 / ((1-c|x|^2)(1-c|y|^2))) / sqrt(c).
double arcosh_distance(const Vec& x, const Vec& y, double c) {
  const double num = 2.0 * c * (x - y).squaredNorm();
  const double den = (1.0 - c * x.squaredNorm()) * (1.0 - c * y.squaredNorm());
  return std::acosh(1.0 + num / den) / std::sqrt(c);
}

TEST(Curvature, ConvertsBetweenConventions) {
  const Curvature k = Curvature::from_k(-0.14);
  EXPECT_DOUBLE_EQ(k.c(), 0.14);
  EXPECT_DOUBLE_EQ(k.k(), -0.14);
  EXPECT_EQ(k.ball_radius(), 1.0 / std::sqrt(0.14));
  EXPECT_EQ(k, Curvature::from_c(0.14));
}

TEST(Curvature, RejectsNonNegativeOrNonFinite) {
  EXPECT_THROW(Curvature::from_k(0.0), InvalidInput);
  EXPECT_THROW(Curvature::from_k(0.5), InvalidInput);
  EXPECT_THROW(Curvature::from_k(std::nan("")), InvalidInput);
  EXPECT_THROW(Curvature::from_k(-INFINITY), InvalidInput);
  EXPECT_THROW(Curvature::from_c(0.0), InvalidInput);
  EXPECT_THROW(Curvature::from_c(-1.0), InvalidInput);
}

TEST(BallPoint, EnforcesInvariant) {
  const auto c1 = Curvature::from_c(1.0);
  EXPECT_NO_THROW(BallPoint(v2(0.5, 0.5), c1));
  EXPECT_THROW(BallPoint(v2(1.0, 0.0), c1), InvalidInput);
  EXPECT_THROW(BallPoint(v2(NAN, 0.0), c1), InvalidInput);
  EXPECT_TRUE(BallPoint::origin(3, c1).coords().isZero());
}

TEST(ProjectToBall, OriginIsFixed) {
  const auto p = project_to_ball(v2(0, 0), Curvature::from_c(1.0), 1e-5);
  EXPECT_EQ(p.coords(), v2(0, 0));
}

TEST(ProjectToBall, ClipsToUnitRadiusMargin) {
  const auto p = project_to_ball(v3(2, 0, 0), Curvature::from_c(1.0), 1e-5);
  EXPECT_NEAR(p.coords()[0], 0.99999, 1e-12);
  EXPECT_EQ(p.coords()[1], 0.0);
  EXPECT_EQ(p.coords()[2], 0.0);
}

TEST(ProjectToBall, ClipsAtDefaultCurvature) {
  const auto p = project_to_ball(v3(3, 0, 0), Curvature::from_c(0.14), 1e-5);
  const double oracle = (1.0 - 1e-5) / std::sqrt(0.14);
  EXPECT_NEAR(p.coords()[0], oracle, 1e-12);
  EXPECT_NEAR(p.coords()[0], 2.67259, 1e-5);
  EXPECT_LT(p.coords()[0], oracle + 1e-15);
}

TEST(ProjectToBall, InteriorPointsUnchanged) {
  const Vec x = v3(0.3, -0.2, 0.1);
  EXPECT_EQ(project_to_ball(x, Curvature::from_c(1.0)).coords(), x);
}

TEST(ProjectToBall, RejectsBadArguments) {
  const auto c1 = Curvature::from_c(1.0);
  EXPECT_THROW(project_to_ball(v2(INFINITY, 0), c1), InvalidInput);
  EXPECT_THROW(project_to_ball(v2(NAN, 0), c1), InvalidInput);
  EXPECT_THROW(project_to_ball(v2(1, 0), c1, 0.0), InvalidInput);
  EXPECT_THROW(project_to_ball(v2(1, 0), c1, 0.1), InvalidInput);
}

TEST(ProjectToBall, IdempotentBitExact) {
  Rng rng(7);
  for (double c : {0.14, 1.0, 3.7}) {
    const auto curv = Curvature::from_c(c);
    for (int i = 0; i < 2000; ++i) {
      const Vec x = testing::random_vec(rng, 1 + static_cast<Eigen::Index>(rng.below(8)), rng.uniform(0.01, 5.0));
      const auto once = project_to_ball(x, curv);
      const auto twice = project_to_ball(once.coords(), curv);
      ASSERT_EQ(once.coords(), twice.coords());
      ASSERT_LT(c * once.coords().squaredNorm(), 1.0);
    }
  }
}

TEST(ProjectToBall, HugeVectorsStayFinite) {
  const auto p = project_to_ball(v2(1e200, 1e200), Curvature::from_c(1.0));
  EXPECT_TRUE(p.coords().allFinite());
  EXPECT_LT(p.coords().norm(), 1.0);
}

TEST(MobiusAdd, HandEvaluatedExample) {
  const auto c1 = Curvature::from_c(1.0);
  const auto r = mobius_add(BallPoint(v2(0.5, 0), c1), BallPoint(v2(0.25, 0), c1));
  // Collinear points add like tanh rapidities: (a + b) / (1 + ab).
  EXPECT_NEAR(r.coords()[0], 0.75 / 1.125, 1e-15);
  EXPECT_NEAR(r.coords()[0], 2.0 / 3.0, 1e-15);
  EXPECT_EQ(r.coords()[1], 0.0);
}

TEST(MobiusAdd, CollinearRapidityLawAcrossCurvatures) {
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    const double c = rng.uniform(0.01, 4.0);
    const auto curv = Curvature::from_c(c);
    const double a = rng.uniform(-0.95, 0.95) / std::sqrt(c);
    const double b = rng.uniform(-0.95, 0.95) / std::sqrt(c);
    const auto r = mobius_add(BallPoint(v2(a, 0), curv), BallPoint(v2(b, 0), curv));
    const double oracle = (a + b) / (1.0 + c * a * b);
    ASSERT_NEAR(r.coords()[0], oracle, 1e-12 * (1.0 + std::abs(oracle)));
  }
}

TEST(MobiusAdd, IdentityAndInverseProperty) {
  Rng rng(1234);
  for (double c : {0.14, 1.0}) {
    const auto curv = Curvature::from_c(c);
    for (int i = 0; i < 10000; ++i) {
      const auto x = random_ball_point(rng, 3, curv, 0.95);
      const auto zero = BallPoint::origin(3, curv);
      ASSERT_LT((mobius_add(zero, x).coords() - x.coords()).norm(), 1e-12);
      ASSERT_LT(mobius_add(-x, x).coords().norm(), 1e-10);
    }
  }
}

TEST(MobiusAdd, RejectsMismatchedSpaces) {
  const auto a = BallPoint(v2(0.1, 0), Curvature::from_c(1.0));
  const auto b = BallPoint(v2(0.1, 0), Curvature::from_c(0.5));
  const auto d3 = BallPoint(v3(0.1, 0, 0), Curvature::from_c(1.0));
  EXPECT_THROW(mobius_add(a, b), InvalidInput);
  EXPECT_THROW(mobius_add(a, d3), InvalidInput);
  EXPECT_THROW(geodesic_distance(a, b), InvalidInput);
}

TEST(MobiusAdd, ResultStaysInsideNearBoundary) {
  const auto curv = Curvature::from_c(1.0);
  const auto x = project_to_ball(v2(5, 0), curv);
  const auto r = mobius_add(x, x);
  EXPECT_LT(r.coords().squaredNorm(), 1.0);
}

TEST(LogMap, Examples) {
  const auto c1 = Curvature::from_c(1.0);
  EXPECT_TRUE(log_map_origin(BallPoint::origin(2, c1)).coords.isZero());
  const auto t = log_map_origin(BallPoint(v2(0.5, 0), c1)).coords;
  EXPECT_NEAR(t[0], std::atanh(0.5), 1e-15);
  EXPECT_NEAR(t[0], 0.549306, 1e-6);
  EXPECT_EQ(t[1], 0.0);
  const auto small = log_map_origin(BallPoint(v2(0.3, 0), Curvature::from_c(1e-6))).coords;
  EXPECT_NEAR(small[0] / 0.3, 1.0, 1e-6);
}

TEST(GeodesicDistance, Examples) {
  const auto c1 = Curvature::from_c(1.0);
  const BallPoint x(v2(0.3, -0.1), c1);
  EXPECT_EQ(geodesic_distance(x, x), 0.0);
  EXPECT_NEAR(geodesic_distance(BallPoint::origin(2, c1), BallPoint(v2(0.5, 0), c1)), 2.0 * std::atanh(0.5), 1e-15);
  EXPECT_NEAR(geodesic_distance(BallPoint::origin(2, c1), BallPoint(v2(0.5, 0), c1)), 1.098612, 1e-6);
}

TEST(GeodesicDistance, EuclideanLimitExample) {
  const auto c = Curvature::from_c(1e-6);
  const double d = geodesic_distance(BallPoint(v3(0.1, 0, 0), c), BallPoint::origin(3, c));
  EXPECT_NEAR(d / 0.2, 1.0, 1e-3);
}

TEST(GeodesicDistance, MatchesArcoshClosedForm) {
  Rng rng(5);
  for (double c : {0.05, 0.14, 1.0, 2.5}) {
    const auto curv = Curvature::from_c(c);
    for (int i = 0; i < 2000; ++i) {
      const auto x = random_ball_point(rng, 4, curv, 0.9);
      const auto y = random_ball_point(rng, 4, curv, 0.9);
      const double oracle = arcosh_distance(x.coords(), y.coords(), c);
      ASSERT_NEAR(geodesic_distance(x, y), oracle, 1e-9 * (1.0 + oracle));
    }
  }
}

TEST(GeodesicDistance, MetricAxiomsSampled) {
  Rng rng(99);
  for (double c : {0.14, 1.0}) {
    const auto curv = Curvature::from_c(c);
    for (int i = 0; i < 10000; ++i) {
      const auto x = random_ball_point(rng, 3, curv, 0.95);
      const auto y = random_ball_point(rng, 3, curv, 0.95);
      const auto z = random_ball_point(rng, 3, curv, 0.95);
      const double dxy = geodesic_distance(x, y);
      ASSERT_GE(dxy, 0.0);
      ASSERT_EQ(dxy, geodesic_distance(y, x));
      ASSERT_LE(geodesic_distance(x, z), dxy + geodesic_distance(y, z) + 1e-9);
    }
  }
}

TEST(GeodesicDistance, EuclideanLimitProperty) {
  Rng rng(3);
  const auto curv = Curvature::from_c(1e-6);
  for (int i = 0; i < 1000; ++i) {
    const BallPoint x(testing::uniform_in_ball(rng, 3, 0.5), curv);
    const BallPoint y(testing::uniform_in_ball(rng, 3, 0.5), curv);
    const double e = 2.0 * (x.coords() - y.coords()).norm();
    ASSERT_LT(std::abs(geodesic_distance(x, y) - e) / e, 1e-3);
  }
}

TEST(HyperbolicNorm, ExamplesAndMonotonicity) {
  const auto c1 = Curvature::from_c(1.0);
  EXPECT_EQ(hyperbolic_norm(BallPoint::origin(2, c1)), 0.0);
  EXPECT_NEAR(hyperbolic_norm(BallPoint(v2(0.5, 0), c1)), 1.098612, 1e-6);
  EXPECT_GT(hyperbolic_norm(BallPoint(v2(0.6, 0), c1)), hyperbolic_norm(BallPoint(v2(0.5, 0), c1)));
}

TEST(HyperbolicNorm, EqualsTwiceTangentNorm) {
  Rng rng(21);
  for (double c : {0.14, 1.0}) {
    const auto curv = Curvature::from_c(c);
    for (int i = 0; i < 5000; ++i) {
      const auto x = random_ball_point(rng, 5, curv, 0.99);
      const double h = hyperbolic_norm(x);
      ASSERT_NEAR(h, 2.0 * log_map_origin(x).coords.norm(), 1e-12 * (1.0 + h));
      ASSERT_NEAR(h, geodesic_distance(BallPoint::origin(5, curv), x), 1e-12 * (1.0 + h));
    }
  }
}

TEST(ConformalFactor, Examples) {
  const auto c1 = Curvature::from_c(1.0);
  EXPECT_EQ(conformal_factor(BallPoint::origin(2, c1)), 2.0);
  EXPECT_NEAR(conformal_factor(BallPoint(v2(0.5, 0), c1)), 2.0 / 0.75, 1e-15);
  EXPECT_NEAR(conformal_factor(BallPoint(v2(0.5, 0), Curvature::from_c(1e-12))), 2.0, 1e-11);
}

TEST(Derivatives, HyperbolicNormGradientMatchesFiniteDifferences) {
  Rng rng(8);
  const auto curv = Curvature::from_c(0.14);
  for (int i = 0; i < 200; ++i) {
    const auto x = random_ball_point(rng, 4, curv, 0.9);
    const ScalarFn f = [&](const Vec& v) { return hyperbolic_norm(BallPoint(v, curv)); };
    ASSERT_LT(grad_check(f, hyperbolic_norm_grad(x), x.coords(), 1e-6), 1e-6);
  }
  EXPECT_TRUE(hyperbolic_norm_grad(BallPoint::origin(3, curv)).isZero());
}

TEST(Derivatives, GeodesicGradientMatchesFiniteDifferences) {
  Rng rng(9);
  for (double c : {0.14, 1.0}) {
    const auto curv = Curvature::from_c(c);
    for (int i = 0; i < 200; ++i) {
      const auto x = random_ball_point(rng, 3, curv, 0.9);
      const auto y = random_ball_point(rng, 3, curv, 0.9);
      const auto [gx, gy] = geodesic_distance_grad(x, y);
      const ScalarFn fx = [&](const Vec& v) { return geodesic_distance(BallPoint(v, curv), y); };
      const ScalarFn fy = [&](const Vec& v) { return geodesic_distance(x, BallPoint(v, curv)); };
      ASSERT_LT(grad_check(fx, gx, x.coords(), 1e-6), 1e-5);
      ASSERT_LT(grad_check(fy, gy, y.coords(), 1e-6), 1e-5);
    }
  }
}

TEST(Derivatives, LogMapVjpMatchesFiniteDifferences) {
  Rng rng(10);
  const auto curv = Curvature::from_c(1.0);
  for (int i = 0; i < 200; ++i) {
    const auto x = random_ball_point(rng, 3, curv, 0.9);
    const Vec g = testing::random_vec(rng, 3);
    const ScalarFn f = [&](const Vec& v) { return g.dot(log_map_origin(BallPoint(v, curv)).coords); };
    ASSERT_LT(grad_check(f, log_map_origin_vjp(x, g), x.coords(), 1e-6), 1e-6);
  }
}

TEST(Derivatives, ProjectionVjpOnClippedBranch) {
  Rng rng(12);
  const auto curv = Curvature::from_c(0.14);
  for (int i = 0; i < 100; ++i) {
    Vec u = testing::random_vec(rng, 3);
    u *= rng.uniform(1.5, 4.0) * curv.ball_radius() / u.norm();
    const Vec g = testing::random_vec(rng, 3);
    const ScalarFn f = [&](const Vec& v) { return g.dot(project_to_ball(v, curv).coords()); };
    ASSERT_LT(grad_check(f, project_to_ball_vjp(u, g, curv), u, 1e-6), 1e-6);
  }
  const Vec inside = v3(0.1, 0.2, 0.3);
  const Vec g = v3(1, 2, 3);
  EXPECT_EQ(project_to_ball_vjp(inside, g, curv), g);
}

}  // namespace
}  // namespace hyperpc
