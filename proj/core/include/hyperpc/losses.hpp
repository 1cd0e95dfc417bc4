#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hyperpc/hypergeo.hpp"

namespace hyperpc {

/// Affine margin head: gamma = gamma0 * sigmoid(weights . concat(p, w) + bias).
struct MarginHead {
  Vec weights;
  double bias = 0.0;
  double gamma0 = 1000.0;

  /// Zero weights and bias, so the initial margin is gamma0 / 2.
  static MarginHead zeros(Eigen::Index feature_dim, double gamma0);
};

struct LossReport {
  double l_z = 0.0;
  double l_t = 0.0;
  double l_n = 0.0;
  double total = 0.0;
};

/// Which scalar stands in for the "size" of an embedding in the regularizer.
enum class RegNorm {
  Hyperbolic,  // geodesic distance from the origin
  Euclidean,   // plain |x| of the ball coordinates (ablation)
};

/// Distance used between embeddings in the triplet loss.
enum class TripletMetric {
  Tangent,   // |log0(a) - log0(b)|, Euclidean in the tangent space at the origin
  Geodesic,  // ball geodesic distance
};

/// Margin in (0, gamma0), strictly, for every input.
/// Throws InvalidInput if dim(p) + dim(w) != dim(head.weights).
double adaptive_margin(const Vec& p_feat, const Vec& w_feat, const MarginHead& head);

/// max(0, -norm(whole) + norm(part) + gamma / n_points).
double reg_loss(const BallPoint& part, const BallPoint& whole, double gamma, int n_points,
                RegNorm norm = RegNorm::Hyperbolic);

/// Euclidean distance between the origin log-map images of a and b.
double tangent_distance(const BallPoint& a, const BallPoint& b);

/// max(0, d(w, p_pos) - d(w, p_neg) + margin_eps).
double triplet_loss(const BallPoint& w_pos, const BallPoint& p_pos, const BallPoint& p_neg, double margin_eps,
                    TripletMetric metric = TripletMetric::Tangent);

/// total = l_n + l_z + l_t. Throws InvalidInput if l_z or l_t is negative.
LossReport total_loss(double l_z, double l_t, double l_n_external = 0.0);

// ---------------------------------------------------------------------------
// Batched objective over a table of trainable embeddings.
// ---------------------------------------------------------------------------

/// Trainable parameters: one Euclidean vector per sample (rows of `table`,
/// mapped into the ball by project_to_ball before use) plus the margin head.
struct EmbeddingState {
  std::vector<std::string> ids;
  Eigen::MatrixXd table;  // rows: samples, cols: embedding dimension
  MarginHead head;
  Curvature curvature = Curvature::from_c(0.14);
  double eps = kDefaultEps;
  long step = 0;

  Eigen::Index dim() const noexcept { return table.cols(); }
  std::size_t size() const noexcept { return static_cast<std::size_t>(table.rows()); }
  BallPoint ball_point(std::size_t row) const;
};

/// Row indices into EmbeddingState::table.
struct PairTerm {
  std::size_t part;
  std::size_t whole;
  int n_points;  // points in the part, the N of the gamma / N margin
};

struct TripletTerm {
  std::size_t anchor;    // whole
  std::size_t positive;  // part of the same object
  std::size_t negative;  // part from another category
};

struct Batch {
  std::vector<PairTerm> pairs;
  std::vector<TripletTerm> triplets;
};

struct LossOptions {
  double margin_eps = 4.0;
  RegNorm reg_norm = RegNorm::Hyperbolic;
  TripletMetric triplet_metric = TripletMetric::Tangent;
};

struct LossGradients {
  LossReport report;         // l_z, l_t are batch means
  Eigen::MatrixXd d_table;   // same shape as EmbeddingState::table
  Vec d_weights;
  double d_bias = 0.0;
};

/// Value and exact gradient of mean(L_Z) + mean(L_T) over the batch.
/// Hinges contribute zero gradient at and below their kink. Throws
/// InvalidInput on an empty batch or out-of-range indices.
LossGradients loss_gradients(const Batch& batch, const EmbeddingState& state, const LossOptions& options,
                             double l_n_external = 0.0);

// ---------------------------------------------------------------------------
// Finite-difference verification.
// ---------------------------------------------------------------------------

using ScalarFn = std::function<double(const Vec&)>;

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every coordinate.
Vec central_difference(const ScalarFn& fn, const Vec& point, double h);

/// max_i |analytic_i - fd_i| / max(1, |fd_i|). Throws InvalidInput unless
/// h lies in (1e-9, 1e-3) and the gradient length matches the point.
double grad_check(const ScalarFn& fn, const Vec& analytic, const Vec& point, double h);

struct GradCheckCase {
  std::string name;
  long index = 0;
  double max_rel_error = 0.0;
};

struct GradCheckSummary {
  std::vector<GradCheckCase> cases;
  GradCheckCase worst;
};

/// Randomised suite over hinge-active configurations of the single-pair
/// hyperbolic Chamfer distance, L_Z (with adaptive margin) and L_T. Each of the
/// n_cases seeds produces one case per objective. `flip_sign` negates every
/// analytic gradient (harness self-test).
GradCheckSummary run_gradient_suite(std::uint64_t seed, int n_cases, double h = 1e-6, bool flip_sign = false);

}  // namespace hyperpc
