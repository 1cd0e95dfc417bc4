#include "hyperpc/embedopt.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "hyperpc/errors.hpp"

namespace hyperpc {

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidInput("epochs must be at least 1");
  if (steps_per_epoch < 1) throw InvalidInput("steps_per_epoch must be at least 1");
  if (batch_triplets < 1) throw InvalidInput("batch_triplets must be at least 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw InvalidInput("learning rate must be finite and >= 0");
  if (!(gamma0 > 0.0) || !std::isfinite(gamma0)) throw InvalidInput("gamma0 must be positive");
  if (!(margin_eps > 0.0) || !std::isfinite(margin_eps)) throw InvalidInput("margin_eps must be positive");
  if (dim < 2) throw InvalidInput("embedding dimension must be at least 2");
  if (!(curvature_k < 0.0) || !std::isfinite(curvature_k)) throw InvalidInput("curvature k must be negative");
  if (!(eps > 0.0 && eps < 0.1)) throw InvalidInput("eps must lie in (0, 0.1)");
  if (!(init_std > 0.0) || !std::isfinite(init_std)) throw InvalidInput("init_std must be positive");
  if (!(heldout_fraction >= 0.0 && heldout_fraction < 1.0)) throw InvalidInput("heldout_fraction must lie in [0, 1)");
}

HierarchyIndex::HierarchyIndex(const HierarchyManifest& manifest) {
  std::map<std::string, std::size_t> cat_index;
  for (std::size_t c = 0; c < manifest.categories.size(); ++c) cat_index[manifest.categories[c]] = c;
  category_parts.resize(manifest.categories.size());

  std::map<std::string, std::size_t> whole_slot;
  for (std::size_t i = 0; i < manifest.samples.size(); ++i) {
    const auto& s = manifest.samples[i];
    category_of.push_back(cat_index.at(s.category));
    if (s.role == Role::Whole) {
      whole_slot[s.id] = wholes.size();
      wholes.push_back(i);
    }
  }
  parts_of.resize(wholes.size());
  for (std::size_t i = 0; i < manifest.samples.size(); ++i) {
    const auto& s = manifest.samples[i];
    if (s.role != Role::Part) continue;
    const std::size_t slot = whole_slot.at(*s.parent_id);
    parts_of[slot].push_back(i);
    category_parts[category_of[i]].push_back(i);
    pairs.push_back(PairTerm{i, wholes[slot], s.n_points});
  }
  for (auto& parts : parts_of) {
    std::stable_sort(parts.begin(), parts.end(), [&](std::size_t a, std::size_t b) {
      return manifest.samples[a].n_points < manifest.samples[b].n_points;
    });
  }
}

TripletSampler::TripletSampler(const HierarchyManifest& manifest, const HierarchyIndex& index, std::uint64_t seed,
                               double heldout_fraction)
    : manifest_(&manifest), index_(&index), seed_(seed), heldout_fraction_(heldout_fraction) {
  bool any = false;
  for (std::size_t w = 0; w < index.wholes.size() && !any; ++w) {
    if (index.parts_of[w].empty()) continue;
    const std::size_t cat = index.category_of[index.wholes[w]];
    for (std::size_t c = 0; c < index.category_parts.size(); ++c) {
      if (c != cat && !index.category_parts[c].empty()) any = true;
    }
  }
  if (!any) throw InvalidInput("no valid triplets: need parts from at least two categories");
}

bool TripletSampler::is_heldout(const TripletTerm& t) const {
  const auto& s = manifest_->samples;
  const std::uint64_t h = seeded_hash(s[t.anchor].id + '|' + s[t.positive].id + '|' + s[t.negative].id, seed_);
  return static_cast<double>(h >> 11) * 0x1.0p-53 < heldout_fraction_;
}

TripletTerm TripletSampler::sample(Rng& rng) const {
  const auto& idx = *index_;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const std::size_t w = static_cast<std::size_t>(rng.below(idx.wholes.size()));
    const auto& parts = idx.parts_of[w];
    if (parts.empty()) continue;
    const std::size_t anchor = idx.wholes[w];
    const std::size_t positive = parts[static_cast<std::size_t>(rng.below(parts.size()))];
    const std::size_t own = idx.category_of[anchor];
    std::size_t pool = 0;
    for (std::size_t c = 0; c < idx.category_parts.size(); ++c)
      if (c != own) pool += idx.category_parts[c].size();
    if (pool == 0) continue;
    std::size_t pick = static_cast<std::size_t>(rng.below(pool));
    std::size_t negative = 0;
    for (std::size_t c = 0; c < idx.category_parts.size(); ++c) {
      if (c == own) continue;
      if (pick < idx.category_parts[c].size()) {
        negative = idx.category_parts[c][pick];
        break;
      }
      pick -= idx.category_parts[c].size();
    }
    const TripletTerm t{anchor, positive, negative};
    if (!is_heldout(t)) return t;
  }
  throw InvalidInput("could not draw a training triplet; is heldout_fraction too large?");
}

std::vector<TripletTerm> TripletSampler::heldout() const {
  const auto& idx = *index_;
  std::vector<TripletTerm> out;
  for (std::size_t w = 0; w < idx.wholes.size(); ++w) {
    const std::size_t anchor = idx.wholes[w];
    for (std::size_t positive : idx.parts_of[w]) {
      for (std::size_t c = 0; c < idx.category_parts.size(); ++c) {
        if (c == idx.category_of[anchor]) continue;
        for (std::size_t negative : idx.category_parts[c]) {
          const TripletTerm t{anchor, positive, negative};
          if (is_heldout(t)) out.push_back(t);
        }
      }
    }
  }
  return out;
}

EmbeddingState init_state(const HierarchyManifest& manifest, const TrainConfig& config) {
  config.validate();
  EmbeddingState s;
  s.curvature = Curvature::from_k(config.curvature_k);
  s.eps = config.eps;
  s.head = MarginHead::zeros(2 * config.dim, config.gamma0);
  s.table.resize(static_cast<Eigen::Index>(manifest.samples.size()), config.dim);
  Rng rng(mix64(config.seed));
  for (Eigen::Index r = 0; r < s.table.rows(); ++r)
    for (Eigen::Index c = 0; c < s.table.cols(); ++c) s.table(r, c) = config.init_std * rng.normal();
  for (const auto& sample : manifest.samples) s.ids.push_back(sample.id);
  for (Eigen::Index r = 0; r < s.table.rows(); ++r) {
    s.table.row(r) = s.ball_point(static_cast<std::size_t>(r)).coords().transpose();
  }
  return s;
}

AdamOptimizer::AdamOptimizer(const EmbeddingState& state, double learning_rate, double beta1, double beta2,
                             double epsilon)
    : lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon),
      m_table_(Eigen::MatrixXd::Zero(state.table.rows(), state.table.cols())),
      v_table_(Eigen::MatrixXd::Zero(state.table.rows(), state.table.cols())),
      m_w_(Vec::Zero(state.head.weights.size())),
      v_w_(Vec::Zero(state.head.weights.size())) {}

void AdamOptimizer::step(EmbeddingState& state, const LossGradients& g) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const double step = lr_ / c1;

  m_table_ = beta1_ * m_table_ + (1.0 - beta1_) * g.d_table;
  v_table_ = beta2_ * v_table_ + (1.0 - beta2_) * g.d_table.cwiseProduct(g.d_table);
  state.table.array() -= step * m_table_.array() / ((v_table_.array() / c2).sqrt() + epsilon_);

  m_w_ = beta1_ * m_w_ + (1.0 - beta1_) * g.d_weights;
  v_w_ = beta2_ * v_w_ + (1.0 - beta2_) * g.d_weights.cwiseProduct(g.d_weights);
  state.head.weights.array() -= step * m_w_.array() / ((v_w_.array() / c2).sqrt() + epsilon_);

  m_b_ = beta1_ * m_b_ + (1.0 - beta1_) * g.d_bias;
  v_b_ = beta2_ * v_b_ + (1.0 - beta2_) * g.d_bias * g.d_bias;
  state.head.bias -= step * m_b_ / (std::sqrt(v_b_ / c2) + epsilon_);

  // Projection guard; rows already inside the ball are returned unchanged.
  for (Eigen::Index r = 0; r < state.table.rows(); ++r) {
    if (!state.table.row(r).allFinite()) continue;  // reported by the caller's divergence check
    state.table.row(r) = state.ball_point(static_cast<std::size_t>(r)).coords().transpose();
  }
  ++state.step;
}

namespace {

std::string offending_sample(const EmbeddingState& state, const Batch& batch, const LossOptions& options) {
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (!state.table.row(static_cast<Eigen::Index>(i)).allFinite()) return state.ids[i];
  }
  for (const auto& p : batch.pairs) {
    try {
      const Batch one{{p}, {}};
      if (!std::isfinite(loss_gradients(one, state, options).report.total)) return state.ids[p.part];
    } catch (const std::exception&) {
      return state.ids[p.part];
    }
  }
  for (const auto& t : batch.triplets) {
    try {
      const Batch one{{}, {t}};
      if (!std::isfinite(loss_gradients(one, state, options).report.total)) return state.ids[t.anchor];
    } catch (const std::exception&) {
      return state.ids[t.anchor];
    }
  }
  return state.ids.empty() ? std::string("<none>") : state.ids.front();
}

bool gradients_finite(const LossGradients& g) {
  return std::isfinite(g.report.total) && g.d_table.allFinite() && g.d_weights.allFinite() && std::isfinite(g.d_bias);
}

}  // namespace

Batch monitoring_batch(const HierarchyManifest& manifest, const TrainConfig& config) {
  const HierarchyIndex index(manifest);
  const TripletSampler sampler(manifest, index, config.seed, config.heldout_fraction);
  Batch batch;
  batch.pairs = index.pairs;
  Rng rng(mix64(config.seed ^ 0x6d6f6e69746f72ULL));
  for (int i = 0; i < config.batch_triplets; ++i) batch.triplets.push_back(sampler.sample(rng));
  return batch;
}

TrainResult train(EmbeddingState state, const HierarchyManifest& manifest, const TrainConfig& config) {
  config.validate();
  if (state.size() != manifest.samples.size()) throw InvalidInput("state and manifest disagree on sample count");
  if (state.dim() != config.dim) throw InvalidInput("state dimension differs from config.dim");

  const HierarchyIndex index(manifest);
  const TripletSampler sampler(manifest, index, config.seed, config.heldout_fraction);
  const LossOptions options = config.loss_options();
  const Batch monitor = monitoring_batch(manifest, config);
  AdamOptimizer adam(state, config.learning_rate);

  TrainResult result;
  result.curve.reserve(static_cast<std::size_t>(config.epochs));
  Batch batch;
  batch.pairs = index.pairs;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng rng(mix64(config.seed ^ mix64(static_cast<std::uint64_t>(epoch))));
    for (int s = 0; s < config.steps_per_epoch; ++s) {
      batch.triplets.clear();
      for (int i = 0; i < config.batch_triplets; ++i) batch.triplets.push_back(sampler.sample(rng));
      if (!state.table.allFinite()) {
        throw NumericalError("loss diverged at epoch " + std::to_string(epoch) + "; offending sample '" +
                             offending_sample(state, batch, options) + "'");
      }
      const LossGradients grads = loss_gradients(batch, state, options);
      if (!gradients_finite(grads)) {
        throw NumericalError("loss diverged at epoch " + std::to_string(epoch) + "; offending sample '" +
                             offending_sample(state, batch, options) + "'");
      }
      adam.step(state, grads);
    }
    const LossReport report = state.table.allFinite() ? loss_gradients(monitor, state, options).report
                                                      : LossReport{NAN, NAN, 0.0, NAN};
    if (!std::isfinite(report.total)) {
      throw NumericalError("loss diverged at epoch " + std::to_string(epoch) + "; offending sample '" +
                           offending_sample(state, monitor, options) + "'");
    }
    result.curve.push_back(report);
  }
  result.state = std::move(state);
  return result;
}

HierarchyEval evaluate_hierarchy(const EmbeddingState& state, const HierarchyManifest& manifest,
                                 const TrainConfig& config) {
  const HierarchyIndex index(manifest);
  std::vector<double> norm(state.size());
  std::vector<BallPoint> ball;
  ball.reserve(state.size());
  for (std::size_t i = 0; i < state.size(); ++i) {
    ball.push_back(state.ball_point(i));
    norm[i] = hyperbolic_norm(ball.back());
  }

  HierarchyEval ev;
  std::size_t ordered = 0;
  for (const auto& p : index.pairs) ordered += norm[p.part] < norm[p.whole] ? 1 : 0;
  ev.n_pairs = index.pairs.size();
  ev.norm_order_rate = ev.n_pairs ? static_cast<double>(ordered) / static_cast<double>(ev.n_pairs) : 0.0;

  std::size_t chains = 0;
  for (std::size_t w = 0; w < index.wholes.size(); ++w) {
    if (index.parts_of[w].empty()) continue;
    ++ev.n_objects;
    bool ok = true;
    const auto& parts = index.parts_of[w];
    for (std::size_t k = 0; k < parts.size(); ++k) {
      const double next = k + 1 < parts.size() ? norm[parts[k + 1]] : norm[index.wholes[w]];
      ok = ok && norm[parts[k]] < next;
    }
    chains += ok ? 1 : 0;
  }
  ev.chain_rate = ev.n_objects ? static_cast<double>(chains) / static_cast<double>(ev.n_objects) : 0.0;

  const TripletSampler sampler(manifest, index, config.seed, config.heldout_fraction);
  const auto heldout = sampler.heldout();
  auto dist = [&](std::size_t a, std::size_t b) {
    return config.triplet_metric == TripletMetric::Tangent ? tangent_distance(ball[a], ball[b])
                                                           : geodesic_distance(ball[a], ball[b]);
  };
  std::size_t correct = 0;
  for (const auto& t : heldout) correct += dist(t.anchor, t.positive) < dist(t.anchor, t.negative) ? 1 : 0;
  ev.n_heldout = heldout.size();
  ev.triplet_accuracy = ev.n_heldout ? static_cast<double>(correct) / static_cast<double>(ev.n_heldout) : 0.0;
  return ev;
}

std::vector<DiskPoint> export_disk(const EmbeddingState& state, const HierarchyManifest& manifest) {
  if (state.dim() != 2) {
    throw UnsupportedConfig("disk export needs a 2-D embedding; train with dim = 2 (got " +
                            std::to_string(state.dim()) + ")");
  }
  if (state.size() != manifest.samples.size()) throw InvalidInput("state and manifest disagree on sample count");
  std::vector<DiskPoint> out;
  out.reserve(state.size());
  for (std::size_t i = 0; i < state.size(); ++i) {
    const BallPoint p = state.ball_point(i);
    const auto& s = manifest.samples[i];
    const double k = state.curvature.sqrt_c();
    out.push_back(DiskPoint{s.id, s.category, s.role, s.n_points, hyperbolic_norm(p), k * p.coords()[0],
                            k * p.coords()[1]});
  }
  return out;
}

}  // namespace hyperpc
