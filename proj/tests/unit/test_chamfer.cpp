#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "hyperpc/chamfer.hpp"
#include "hyperpc/errors.hpp"
#include "hyperpc/kdtree.hpp"
#include "hyperpc/losses.hpp"
#include "hyperpc/parallel.hpp"

namespace hyperpc {
namespace {

using testing::random_cloud;

PointCloud cloud(std::initializer_list<Point3> pts) { return PointCloud(std::vector<Point3>(pts)); }

// Radial distance between collinear points on one ray through the origin.
double radial(double a, double b, double c) {
  return 2.0 / std::sqrt(c) * std::abs(std::atanh(std::sqrt(c) * a) - std::atanh(std::sqrt(c) * b));
}

TEST(PointCloudType, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(PointCloud(std::vector<Point3>{}), InvalidInput);
  EXPECT_THROW(cloud({Point3(0, NAN, 0)}), InvalidInput);
  EXPECT_THROW(cloud({Point3(INFINITY, 0, 0)}), InvalidInput);
}

TEST(NNIndex, SinglePointAnswersEveryQuery) {
  const NNIndex idx(cloud({Point3(1, 2, 3)}));
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const Point3 q(rng.normal(), rng.normal(), rng.normal());
    EXPECT_EQ(idx.nearest(q).index, 0u);
  }
}

TEST(NNIndex, CoincidentQueryHasZeroDistance) {
  Rng rng(2);
  const auto c = random_cloud(rng, 300);
  const NNIndex idx(c);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto nb = idx.nearest(c[i]);
    ASSERT_EQ(nb.squared_distance, 0.0);
    ASSERT_EQ(nb.index, i);
  }
}

TEST(NNIndex, MatchesBruteForceOn2048Points) {
  Rng rng(3);
  const auto c = random_cloud(rng, 2048);
  const NNIndex idx(c);
  for (int i = 0; i < 1024; ++i) {
    const Point3 q(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2));
    const auto a = idx.nearest(q);
    const auto b = brute_force_nearest(c, q);
    ASSERT_EQ(a.index, b.index);
    ASSERT_EQ(a.squared_distance, b.squared_distance);
  }
}

TEST(NNIndex, LowestIndexWinsTies) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = testing::lattice_cloud(rng, 500, 3);
    const NNIndex idx(c);
    for (int i = 0; i < 200; ++i) {
      const Point3 q(0.5 * static_cast<double>(rng.below(7)), 0.5 * static_cast<double>(rng.below(7)),
                     0.5 * static_cast<double>(rng.below(7)));
      const auto a = idx.nearest(q);
      const auto b = brute_force_nearest(c, q);
      ASSERT_EQ(a.index, b.index);
      ASSERT_EQ(a.squared_distance, b.squared_distance);
    }
  }
}

TEST(Chamfer, SelfDistanceIsZero) {
  Rng rng(5);
  const auto x = random_cloud(rng, 200);
  EXPECT_EQ(chamfer_distance(x, x, ChamferVariant::L1), 0.0);
  EXPECT_EQ(chamfer_distance(x, x, ChamferVariant::L2), 0.0);
}

TEST(Chamfer, SinglePointExample) {
  const auto x = cloud({Point3(0, 0, 0)});
  const auto y = cloud({Point3(1, 0, 0)});
  EXPECT_EQ(chamfer_distance(x, y, ChamferVariant::L1), 2.0);
  EXPECT_EQ(chamfer_distance(x, y, ChamferVariant::L2), 2.0);
}

TEST(Chamfer, HandExampleWithUnequalSizes) {
  const auto x = cloud({Point3(0, 0, 0), Point3(2, 0, 0)});
  const auto y = cloud({Point3(0, 1, 0)});
  // x->y: 1 and sqrt(5); y->x: 1.
  EXPECT_DOUBLE_EQ(chamfer_distance(x, y, ChamferVariant::L1), (1.0 + std::sqrt(5.0)) / 2.0 + 1.0);
  EXPECT_DOUBLE_EQ(chamfer_distance(x, y, ChamferVariant::L2), (1.0 + 5.0) / 2.0 + 1.0);
}

TEST(Chamfer, IndexedEqualsBruteForceBitExact) {
  Rng rng(6);
  for (int i = 0; i < 20; ++i) {
    const auto x = random_cloud(rng, 128);
    const auto y = random_cloud(rng, 128);
    for (auto v : {ChamferVariant::L1, ChamferVariant::L2}) {
      ASSERT_EQ(chamfer_distance(x, y, v), chamfer_distance_brute_force(x, y, v));
    }
  }
}

TEST(Chamfer, IndexedEqualsBruteForceOnTies) {
  Rng rng(7);
  for (int i = 0; i < 10; ++i) {
    const auto x = testing::lattice_cloud(rng, 1 + rng.below(400), 5);
    const auto y = testing::lattice_cloud(rng, 1 + rng.below(400), 5);
    ASSERT_EQ(chamfer_distance(x, y, ChamferVariant::L1), chamfer_distance_brute_force(x, y, ChamferVariant::L1));
  }
}

TEST(Chamfer, SymmetricBitExact) {
  Rng rng(8);
  for (int i = 0; i < 20; ++i) {
    const auto x = random_cloud(rng, 1 + rng.below(300));
    const auto y = random_cloud(rng, 1 + rng.below(300));
    ASSERT_EQ(chamfer_distance(x, y, ChamferVariant::L1), chamfer_distance(y, x, ChamferVariant::L1));
    ASSERT_EQ(chamfer_distance(x, y, ChamferVariant::L2), chamfer_distance(y, x, ChamferVariant::L2));
  }
}

TEST(Chamfer, ZeroIffSameSet) {
  const auto x = cloud({Point3(0, 0, 0), Point3(1, 0, 0), Point3(0, 1, 0)});
  const auto perm = cloud({Point3(0, 1, 0), Point3(0, 0, 0), Point3(1, 0, 0), Point3(0, 0, 0)});
  EXPECT_EQ(chamfer_distance(x, perm, ChamferVariant::L1), 0.0);
  const auto extra = cloud({Point3(0, 0, 0), Point3(1, 0, 0), Point3(0, 1, 0), Point3(0, 0, 1e-9)});
  EXPECT_GT(chamfer_distance(x, extra, ChamferVariant::L1), 0.0);
}

TEST(Chamfer, ThreadCountDoesNotChangeResult) {
  Rng rng(9);
  const auto x = random_cloud(rng, 3000);
  const auto y = random_cloud(rng, 2500);
  set_thread_count(1);
  const double one = chamfer_distance(x, y, ChamferVariant::L1);
  const double h1 = hyper_chamfer(x, y, Curvature::from_c(0.14));
  set_thread_count(4);
  EXPECT_EQ(one, chamfer_distance(x, y, ChamferVariant::L1));
  EXPECT_EQ(h1, hyper_chamfer(x, y, Curvature::from_c(0.14)));
  set_thread_count(0);
}

TEST(NearestDistances, MatchesBruteForce) {
  Rng rng(10);
  const auto x = random_cloud(rng, 100);
  const auto y = random_cloud(rng, 80);
  const auto d = nearest_distances(x, y);
  ASSERT_EQ(d.size(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_EQ(d[i], std::sqrt(brute_force_nearest(y, x[i]).squared_distance));
  }
}

TEST(HyperChamfer, SelfDistanceIsZero) {
  Rng rng(11);
  const auto x = random_cloud(rng, 100, 0.8);
  EXPECT_EQ(hyper_chamfer(x, x, Curvature::from_c(0.14)), 0.0);
}

TEST(HyperChamfer, SinglePairExample) {
  const double c = 0.14;
  const double oracle = 2.0 * (2.0 / std::sqrt(c)) * std::atanh(std::sqrt(c) * 0.1);
  const double d = hyper_chamfer(cloud({Point3(0.1, 0, 0)}), cloud({Point3(0, 0, 0)}), Curvature::from_c(c));
  EXPECT_NEAR(d, oracle, 1e-14);
  EXPECT_NEAR(d, 0.40019, 1e-5);
}

TEST(HyperChamfer, UsesHyperbolicNearestNeighbour) {
  // From x = 0.5 the Euclidean neighbour is 0.85 (0.35 away) but the
  // hyperbolic neighbour is 0.1, because distances grow towards the boundary.
  const double c = 1.0;
  const auto x = cloud({Point3(0.5, 0, 0)});
  const auto y = cloud({Point3(0.85, 0, 0), Point3(0.1, 0, 0)});
  const double expected = radial(0.5, 0.1, c) + (radial(0.85, 0.5, c) + radial(0.1, 0.5, c)) / 2.0;
  EXPECT_NEAR(hyper_chamfer(x, y, Curvature::from_c(c)), expected, 1e-12);
}

TEST(HyperChamfer, SymmetricBitExact) {
  Rng rng(12);
  for (int i = 0; i < 20; ++i) {
    const auto x = random_cloud(rng, 1 + rng.below(150), 1.5);
    const auto y = random_cloud(rng, 1 + rng.below(150), 1.5);
    const auto curv = Curvature::from_c(rng.uniform(0.05, 1.0));
    ASSERT_EQ(hyper_chamfer(x, y, curv), hyper_chamfer(y, x, curv));
  }
}

TEST(HyperChamfer, EuclideanLimitTightensMonotonically) {
  Rng rng(13);
  std::vector<Point3> a, b;
  for (int i = 0; i < 64; ++i) {
    a.emplace_back(testing::uniform_in_ball(rng, 3, 0.5));
    b.emplace_back(testing::uniform_in_ball(rng, 3, 0.5));
  }
  const PointCloud x(a), y(b);
  const double euclid = 2.0 * chamfer_distance(x, y, ChamferVariant::L1);
  double previous = INFINITY;
  for (double c : {1e-4, 1e-6, 1e-8}) {
    const double rel = std::abs(hyper_chamfer(x, y, Curvature::from_c(c)) - euclid) / euclid;
    EXPECT_LT(rel, previous);
    if (c <= 1e-6) EXPECT_LT(rel, 1e-3);
    previous = rel;
  }
}

TEST(HyperChamfer, ProjectsPointsOutsideTheBall) {
  const auto curv = Curvature::from_c(1.0);
  const auto far = cloud({Point3(10, 0, 0)});
  const auto origin = cloud({Point3(0, 0, 0)});
  const double d = hyper_chamfer(far, origin, curv);
  EXPECT_TRUE(std::isfinite(d));
  EXPECT_NEAR(d, 2.0 * 2.0 * std::atanh(1.0 - 1e-5), 1e-6);
}

TEST(HyperChamfer, GradientValueAndFiniteDifferences) {
  Rng rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    const auto curv = Curvature::from_c(rng.uniform(0.05, 1.0));
    const auto x = random_cloud(rng, 6, 0.4 * curv.ball_radius());
    const auto y = random_cloud(rng, 5, 0.4 * curv.ball_radius());
    const auto g = hyper_chamfer_with_gradient(x, y, curv);
    EXPECT_EQ(g.value, hyper_chamfer(x, y, curv));

    Vec flat(3 * static_cast<Eigen::Index>(x.size() + y.size()));
    Vec grad(flat.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      flat.segment<3>(3 * static_cast<Eigen::Index>(i)) = x[i];
      grad.segment<3>(3 * static_cast<Eigen::Index>(i)) = g.grad_x[i];
    }
    const auto off = 3 * static_cast<Eigen::Index>(x.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      flat.segment<3>(off + 3 * static_cast<Eigen::Index>(i)) = y[i];
      grad.segment<3>(off + 3 * static_cast<Eigen::Index>(i)) = g.grad_y[i];
    }
    const ScalarFn f = [&](const Vec& v) {
      std::vector<Point3> a(x.size()), b(y.size());
      for (std::size_t i = 0; i < a.size(); ++i) a[i] = v.segment<3>(3 * static_cast<Eigen::Index>(i));
      for (std::size_t i = 0; i < b.size(); ++i) b[i] = v.segment<3>(off + 3 * static_cast<Eigen::Index>(i));
      return hyper_chamfer(PointCloud(a), PointCloud(b), curv);
    };
    ASSERT_LT(grad_check(f, grad, flat, 1e-6), 1e-5);
  }
}

}  // namespace
}  // namespace hyperpc
