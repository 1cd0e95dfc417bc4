#include "hyperpc/hypergeo.hpp"

#include <algorithm>
#include <cmath>

#include "hyperpc/errors.hpp"

namespace hyperpc {
namespace {

double safe_norm(const Vec& x) {
  const double n = x.norm();
  return std::isfinite(n) ? n : x.stableNorm();
}

void require_same_space(const BallPoint& a, const BallPoint& b) {
  if (!(a.curvature() == b.curvature())) throw InvalidInput("ball points have different curvature");
  if (a.dim() != b.dim()) throw InvalidInput("ball points have different dimension");
}

bool lexicographic_less(const Vec& a, const Vec& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

// |(-x) (+) y| without the boundary projection applied by mobius_add.
double mobius_difference_norm(const Vec& x, const Vec& y, double c) {
  const double xy = -x.dot(y);
  const double xx = x.squaredNorm();
  const double yy = y.squaredNorm();
  const double den = 1.0 + 2.0 * c * xy + c * c * xx * yy;
  const Vec num = -(1.0 + 2.0 * c * xy + c * yy) * x + (1.0 - c * xx) * y;
  return num.norm() / den;
}

}  // namespace

Curvature Curvature::from_k(double k) {
  if (!std::isfinite(k) || !(k < 0.0)) throw InvalidInput("curvature k must be finite and negative");
  return from_c(-k);
}

Curvature Curvature::from_c(double c) {
  if (!std::isfinite(c) || !(c > 0.0)) throw InvalidInput("curvature magnitude c must be finite and positive");
  return Curvature(c, std::sqrt(c));
}

BallPoint::BallPoint(Vec coords, Curvature curv) : coords_(std::move(coords)), curv_(curv) {
  if (!coords_.allFinite()) throw InvalidInput("ball point has non-finite coordinates");
  if (!(curv_.c() * coords_.squaredNorm() < 1.0)) throw InvalidInput("point lies outside the Poincare ball");
}

BallPoint BallPoint::origin(Eigen::Index dim, Curvature curv) {
  return BallPoint(Vec::Zero(dim), curv, Unchecked{});
}

BallPoint BallPoint::operator-() const { return BallPoint(-coords_, curv_, Unchecked{}); }

BallPoint project_to_ball(const Vec& x, Curvature curv, double eps) {
  if (!(eps > 0.0 && eps < 0.1)) throw InvalidInput("eps must lie in (0, 0.1)");
  if (!x.allFinite()) throw InvalidInput("cannot project non-finite vector into the ball");

  const double limit = (1.0 - eps) * curv.ball_radius();
  const double norm = safe_norm(x);
  if (norm < limit) return BallPoint(x, curv, BallPoint::Unchecked{});

  Vec y = (limit / norm) * x;
  // Rounding may leave |y| == limit; shrink by ulps until strictly inside so
  // that a second projection is the identity.
  while (y.norm() >= limit) y *= std::nextafter(1.0, 0.0);
  return BallPoint(std::move(y), curv, BallPoint::Unchecked{});
}

BallPoint mobius_add(const BallPoint& z, const BallPoint& x, double eps) {
  require_same_space(z, x);
  const double c = z.curvature().c();
  const double zx = z.coords().dot(x.coords());
  const double zz = z.coords().squaredNorm();
  const double xx = x.coords().squaredNorm();
  const double den = 1.0 + 2.0 * c * zx + c * c * zz * xx;
  Vec sum = ((1.0 + 2.0 * c * zx + c * xx) / den) * z.coords() + ((1.0 - c * zz) / den) * x.coords();
  if (c * sum.squaredNorm() >= 1.0) return project_to_ball(sum, z.curvature(), eps);
  return BallPoint(std::move(sum), z.curvature(), BallPoint::Unchecked{});
}

TangentVector log_map_origin(const BallPoint& x) {
  const double r = x.coords().norm();
  if (r == 0.0) return {Vec::Zero(x.dim())};
  const double a = x.curvature().sqrt_c() * r;
  return {(std::atanh(a) / a) * x.coords()};
}

double geodesic_distance(const BallPoint& x, const BallPoint& y) {
  require_same_space(x, y);
  const Curvature curv = x.curvature();
  const bool swap = lexicographic_less(y.coords(), x.coords());
  const Vec& a = swap ? y.coords() : x.coords();
  const Vec& b = swap ? x.coords() : y.coords();
  if (a == b) return 0.0;  // rounding in the Mobius sum would leave ~1e-16
  const double arg = curv.sqrt_c() * mobius_difference_norm(a, b, curv.c());
  if (!(arg < 1.0)) throw NumericalError("arctanh argument left [0, 1) in geodesic distance");
  return 2.0 / curv.sqrt_c() * std::atanh(arg);
}

double hyperbolic_norm(const BallPoint& x) {
  const Curvature curv = x.curvature();
  const double arg = curv.sqrt_c() * x.coords().norm();
  if (!(arg < 1.0)) throw NumericalError("arctanh argument left [0, 1) in hyperbolic norm");
  return 2.0 / curv.sqrt_c() * std::atanh(arg);
}

double conformal_factor(const BallPoint& z) {
  return 2.0 / (1.0 - z.curvature().c() * z.coords().squaredNorm());
}

Vec project_to_ball_vjp(const Vec& u, const Vec& g, Curvature curv, double eps) {
  const double limit = (1.0 - eps) * curv.ball_radius();
  const double norm = safe_norm(u);
  if (norm < limit) return g;
  const Vec dir = u / norm;
  return (limit / norm) * (g - dir * dir.dot(g));
}

Vec hyperbolic_norm_grad(const BallPoint& x) {
  const double r = x.coords().norm();
  if (r == 0.0) return Vec::Zero(x.dim());
  return (conformal_factor(x) / r) * x.coords();
}

Vec log_map_origin_vjp(const BallPoint& x, const Vec& g) {
  const double r = x.coords().norm();
  if (r == 0.0) return g;
  const Curvature curv = x.curvature();
  const double f_over_r = std::atanh(curv.sqrt_c() * r) / (curv.sqrt_c() * r);
  const double f_prime = 1.0 / (1.0 - curv.c() * r * r);
  const Vec dir = x.coords() / r;
  return f_over_r * g + (f_prime - f_over_r) * dir.dot(g) * dir;
}

std::pair<Vec, Vec> geodesic_distance_grad(const BallPoint& x, const BallPoint& y) {
  require_same_space(x, y);
  const double c = x.curvature().c();
  const Vec diff = x.coords() - y.coords();
  const double delta = diff.norm();
  if (delta == 0.0) return {Vec::Zero(x.dim()), Vec::Zero(y.dim())};

  // Closed form of the same distance: arcosh(1 + 2c|x-y|^2 / (alpha beta)) / sqrt(c),
  // differentiated with gamma^2 - 1 factored to avoid cancellation near x == y.
  const double alpha = 1.0 - c * x.coords().squaredNorm();
  const double beta = 1.0 - c * y.coords().squaredNorm();
  const double ab = alpha * beta;
  const double gamma_plus_one = 2.0 + 2.0 * c * delta * delta / ab;
  const double scale = (4.0 * c / ab) / (std::sqrt(c) * std::sqrt(2.0 * c * gamma_plus_one / ab));
  Vec gx = scale * (diff / delta + (c * delta / alpha) * x.coords());
  Vec gy = scale * (-diff / delta + (c * delta / beta) * y.coords());
  return {std::move(gx), std::move(gy)};
}

}  // namespace hyperpc
