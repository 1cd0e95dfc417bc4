#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hyperpc/hierdata.hpp"
#include "hyperpc/losses.hpp"
#include "hyperpc/random.hpp"

namespace hyperpc {

/// Hyper-parameters of the embedding trainer.
///
/// learning_rate defaults to 1e-3; 1e-4 is the full-scale reconstruction
/// setting and converges too slowly for a few hundred epochs of free
/// embeddings. An epoch is `steps_per_epoch` optimizer steps, each on every
/// (part, whole) pair plus `batch_triplets` freshly sampled triplets.
struct TrainConfig {
  int epochs = 200;
  int steps_per_epoch = 25;
  int batch_triplets = 128;
  double learning_rate = 1e-3;
  double gamma0 = 1000.0;
  double margin_eps = 4.0;
  int dim = 16;
  std::uint64_t seed = 42;
  double curvature_k = -0.14;
  double eps = kDefaultEps;
  double init_std = 0.01;
  double heldout_fraction = 0.2;
  RegNorm reg_norm = RegNorm::Hyperbolic;
  TripletMetric triplet_metric = TripletMetric::Tangent;

  /// Throws InvalidInput on out-of-range values.
  void validate() const;
  LossOptions loss_options() const { return {margin_eps, reg_norm, triplet_metric}; }
};

/// Row-level view of a manifest: which rows are wholes, their parts, and the
/// per-category part pools negatives are drawn from.
struct HierarchyIndex {
  std::vector<PairTerm> pairs;                       // every (part, whole)
  std::vector<std::size_t> wholes;                   // rows of wholes
  std::vector<std::vector<std::size_t>> parts_of;    // aligned with wholes, ascending n_points
  std::vector<std::size_t> category_of;              // per row
  std::vector<std::vector<std::size_t>> category_parts;

  explicit HierarchyIndex(const HierarchyManifest& manifest);
};

/// Splits the (anchor, positive, negative) space into train and held-out
/// triplets by a seeded hash of the three sample ids.
class TripletSampler {
 public:
  TripletSampler(const HierarchyManifest& manifest, const HierarchyIndex& index, std::uint64_t seed,
                 double heldout_fraction);

  bool is_heldout(const TripletTerm& t) const;

  /// Uniform training triplet: random whole, random part of it, random part
  /// from any other category. Held-out draws are rejected.
  TripletTerm sample(Rng& rng) const;

  /// Every held-out triplet in canonical order.
  std::vector<TripletTerm> heldout() const;

 private:
  const HierarchyManifest* manifest_;
  const HierarchyIndex* index_;
  std::uint64_t seed_;
  double heldout_fraction_;
};

/// Isotropic Gaussian rows (std config.init_std), zero margin head.
EmbeddingState init_state(const HierarchyManifest& manifest, const TrainConfig& config);

/// Adaptive moment estimation over every trainable parameter, followed by a
/// projection guard that keeps each row strictly inside the ball.
class AdamOptimizer {
 public:
  AdamOptimizer(const EmbeddingState& state, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8);

  void step(EmbeddingState& state, const LossGradients& grads);

 private:
  double lr_, beta1_, beta2_, epsilon_;
  long t_ = 0;
  Eigen::MatrixXd m_table_, v_table_;
  Vec m_w_, v_w_;
  double m_b_ = 0.0, v_b_ = 0.0;
};

struct TrainResult {
  EmbeddingState state;
  std::vector<LossReport> curve;  // one entry per epoch
};

/// Trains embeddings and margin head on L_Z + L_T. The recorded curve is the
/// loss on a fixed monitoring batch (all pairs plus a seeded triplet set)
/// after each epoch. Throws InvalidInput if there are no cross-category
/// negatives and NumericalError naming a sample if the loss diverges.
TrainResult train(EmbeddingState state, const HierarchyManifest& manifest, const TrainConfig& config);

/// Monitoring batch used for the loss curve.
Batch monitoring_batch(const HierarchyManifest& manifest, const TrainConfig& config);

struct HierarchyEval {
  double norm_order_rate = 0.0;   // pairs with norm(part) < norm(whole)
  double chain_rate = 0.0;        // objects with norm(P1) < ... < norm(W)
  double triplet_accuracy = 0.0;  // held-out triplets with d(W, P+) < d(W, P-)
  std::size_t n_pairs = 0;
  std::size_t n_objects = 0;
  std::size_t n_heldout = 0;
};

HierarchyEval evaluate_hierarchy(const EmbeddingState& state, const HierarchyManifest& manifest,
                                 const TrainConfig& config);

struct DiskPoint {
  std::string id;
  std::string category;
  Role role;
  int n_points;
  double hnorm;
  double x, y;  // inside the unit disk
};

/// Rescales a 2-D state from the ball of radius 1/sqrt(c) to the unit disk.
/// Throws UnsupportedConfig unless the state is 2-dimensional.
std::vector<DiskPoint> export_disk(const EmbeddingState& state, const HierarchyManifest& manifest);

}  // namespace hyperpc
