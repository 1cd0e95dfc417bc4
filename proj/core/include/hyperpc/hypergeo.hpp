#pragma once

#include <Eigen/Core>

#include <utility>

namespace hyperpc {

using Vec = Eigen::VectorXd;

/// Default boundary margin used when clipping points into the ball.
inline constexpr double kDefaultEps = 1e-5;

/// Negative sectional curvature of a Poincare ball.
///
/// Stored as the magnitude c = |k| > 0. The ball has radius 1/sqrt(c).
class Curvature {
 public:
  /// From the (negative) curvature k. Throws InvalidInput unless k < 0 and finite.
  static Curvature from_k(double k);
  /// From the magnitude c = |k|. Throws InvalidInput unless c > 0 and finite.
  static Curvature from_c(double c);

  double k() const noexcept { return -c_; }
  double c() const noexcept { return c_; }
  double sqrt_c() const noexcept { return sqrt_c_; }
  double ball_radius() const noexcept { return 1.0 / sqrt_c_; }

  friend bool operator==(const Curvature&, const Curvature&) = default;

 private:
  Curvature(double c, double sqrt_c) : c_(c), sqrt_c_(sqrt_c) {}
  double c_;
  double sqrt_c_;
};

/// A point strictly inside the Poincare ball: c * |coords|^2 < 1.
class BallPoint {
 public:
  /// Validates the ball invariant; throws InvalidInput on violation.
  BallPoint(Vec coords, Curvature curv);

  static BallPoint origin(Eigen::Index dim, Curvature curv);

  const Vec& coords() const noexcept { return coords_; }
  Curvature curvature() const noexcept { return curv_; }
  Eigen::Index dim() const noexcept { return coords_.size(); }

  /// Additive inverse -x, which is also the Mobius inverse.
  BallPoint operator-() const;

 private:
  struct Unchecked {};
  BallPoint(Vec coords, Curvature curv, Unchecked)
      : coords_(std::move(coords)), curv_(curv) {}

  Vec coords_;
  Curvature curv_;

  friend BallPoint project_to_ball(const Vec&, Curvature, double);
  friend BallPoint mobius_add(const BallPoint&, const BallPoint&, double);
};

/// Vector in the tangent space at the origin of the ball.
struct TangentVector {
  Vec coords;
};

/// Clips x into the ball: x is kept if |x| < (1 - eps) / sqrt(c), otherwise
/// rescaled onto that radius. Idempotent bit-for-bit.
/// Throws InvalidInput for non-finite x or eps outside (0, 0.1).
BallPoint project_to_ball(const Vec& x, Curvature curv, double eps = kDefaultEps);

/// Mobius addition z (+) x. Throws InvalidInput on curvature or dimension mismatch.
BallPoint mobius_add(const BallPoint& z, const BallPoint& x, double eps = kDefaultEps);

/// Logarithmic map at the origin; the zero vector maps to zero.
TangentVector log_map_origin(const BallPoint& x);

/// Geodesic distance (2/sqrt(c)) artanh(sqrt(c) |(-x) (+) y|).
///
/// Evaluated on a canonical ordering of the two arguments, so
/// geodesic_distance(x, y) == geodesic_distance(y, x) exactly.
double geodesic_distance(const BallPoint& x, const BallPoint& y);

/// Geodesic distance from the origin.
double hyperbolic_norm(const BallPoint& x);

/// Conformal factor 2 / (1 - c |z|^2).
double conformal_factor(const BallPoint& z);

// ---------------------------------------------------------------------------
// Derivatives. All return Euclidean gradients with respect to raw coordinates.
// ---------------------------------------------------------------------------

/// Pulls a gradient g taken at project_to_ball(u) back to u. Identity inside
/// the ball; the exact Jacobian of the radial rescaling when u is clipped.
Vec project_to_ball_vjp(const Vec& u, const Vec& g, Curvature curv, double eps = kDefaultEps);

/// Gradient of hyperbolic_norm: conformal_factor(x) * x/|x|, zero at the origin.
Vec hyperbolic_norm_grad(const BallPoint& x);

/// Pulls a gradient g in tangent space back through log_map_origin.
Vec log_map_origin_vjp(const BallPoint& x, const Vec& g);

/// Gradients of geodesic_distance(x, y) with respect to x and y. Zero when x == y.
std::pair<Vec, Vec> geodesic_distance_grad(const BallPoint& x, const BallPoint& y);

}  // namespace hyperpc
