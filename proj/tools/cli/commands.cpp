#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "hyperpc/chamfer.hpp"
#include "hyperpc/cloud_io.hpp"
#include "hyperpc/embedopt.hpp"
#include "hyperpc/errors.hpp"
#include "hyperpc/hierdata.hpp"
#include "hyperpc/hyperbolicity.hpp"
#include "hyperpc/losses.hpp"
#include "hyperpc/parallel.hpp"
#include "hyperpc/reconmetrics.hpp"
#include "svg.hpp"
#include "tables.hpp"

namespace hyperpc::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr double kGradTolerance = 1e-4;
constexpr double kReferenceLearningRate = 1e-4;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string config;
  std::string output;
  unsigned threads = 0;
  std::uint64_t seed = 42;
  double k = -0.14;
  double eps = kDefaultEps;
};

struct PairArgs {
  std::string pred, gt;
  std::string variant = "l1";
  double threshold = kDefaultThreshold;
};

struct DeltaArgs {
  std::string input;
  std::string metric = "euclidean";
  std::size_t batch = 1500;
  std::size_t trials = 3;
};

struct SynthArgs {
  std::string out_dir;
  DatasetConfig data;
};

struct EmbedArgs {
  std::string manifest;
  std::string out_dir;
  TrainConfig train;
  std::string reg_norm = "hyperbolic";
  std::string triplet_metric = "tangent";
};

struct GradArgs {
  int cases = 100;
  double h = 1e-6;
  bool flip_sign = false;
};

// Typed view of a CLI11 result string for the config echo.
Json typed(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  std::int64_t i = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), i);
  if (ec == std::errc() && end == s.data() + s.size() && !s.empty()) return i;
  double d = 0.0;
  if (parse_double(s, d)) return d;
  return s;
}

void echo_options(const CLI::App& app, Json& into) {
  for (const CLI::Option* opt : app.get_options()) {
    if (opt->get_group().empty()) continue;  // hidden
    const std::string name = opt->get_single_name();
    if (name == "help") continue;
    const auto& res = opt->results();
    const std::string value = res.empty() ? opt->get_default_str() : res.back();
    into[name] = typed(value);
  }
}

Json effective_config(const CLI::App& app, const CLI::App& sub) {
  Json j;
  j["command"] = sub.get_name();
  echo_options(app, j);
  echo_options(sub, j);
  return j;
}

void apply_entry(CLI::App& app, CLI::App& sub, const std::string& key, const Json& value) {
  CLI::Option* opt = key == "help" ? nullptr : sub.get_option_no_throw("--" + key);
  if (!opt && key != "help" && key != "config") opt = app.get_option_no_throw("--" + key);
  if (!opt || opt->get_group().empty()) throw UsageError("unknown config key '" + key + "'");
  if (opt->count() > 0) return;  // flags win over the file
  opt->add_result(value.is_string() ? value.get<std::string>() : value.dump());
  opt->run_callback();
}

// Top-level keys are global or belong to the active command; an object keyed
// by a command name holds settings for that command only.
void apply_config_file(CLI::App& app, CLI::App& sub, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Json cfg;
  try {
    cfg = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
    throw ParseError(path, line, e.what());
  }
  if (!cfg.is_object()) throw ParseError(path, 1, "config must be a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    if (value.is_object()) {
      if (!app.get_subcommand_no_throw(key)) throw UsageError("unknown config section '" + key + "'");
      if (key != sub.get_name()) continue;
      for (const auto& [inner, v] : value.items()) apply_entry(app, sub, inner, v);
    } else {
      apply_entry(app, sub, key, value);
    }
  }
}

Curvature require_curvature(const Globals& g) {
  if (!(g.k < 0.0)) throw UsageError("a hyperbolic metric needs --k < 0 (got " + format_double(g.k) + ")");
  return Curvature::from_k(g.k);
}

void emit(const Json& result, const Globals& g, std::ostream& out) {
  if (g.output.empty()) {
    out << result.dump() << '\n';
    return;
  }
  std::ofstream f(g.output, std::ios::binary);
  if (!f) throw IoError("cannot open " + g.output + " for writing");
  f << result.dump(2) << '\n';
  if (!f.flush()) throw IoError("failed writing " + g.output);
}

PointCloud load(const std::string& path, std::ostream& err) {
  std::vector<std::string> warnings;
  PointCloud cloud = read_cloud(path, &warnings);
  for (const auto& w : warnings) err << "warning: " << path << ": " << w << '\n';
  return cloud;
}

Json cmd_chamfer(const PairArgs& a, const Json& config, std::ostream& err) {
  const PointCloud x = load(a.pred, err);
  const PointCloud y = load(a.gt, err);
  Json r;
  r["variant"] = a.variant;
  r["distance"] = chamfer_distance(x, y, a.variant == "l2" ? ChamferVariant::L2 : ChamferVariant::L1);
  r["n_pred"] = x.size();
  r["n_gt"] = y.size();
  r["config"] = config;
  return r;
}

Json cmd_hypercd(const PairArgs& a, const Globals& g, const Json& config, std::ostream& err) {
  const Curvature curv = require_curvature(g);
  const PointCloud x = load(a.pred, err);
  const PointCloud y = load(a.gt, err);
  Json r;
  r["variant"] = "hyper";
  r["distance"] = hyper_chamfer(x, y, curv, g.eps);
  r["n_pred"] = x.size();
  r["n_gt"] = y.size();
  r["k"] = g.k;
  r["config"] = config;
  return r;
}

Json cmd_metrics(const PairArgs& a, const Json& config, std::ostream& err) {
  const MetricsReport m = evaluate(load(a.pred, err), load(a.gt, err), a.threshold);
  Json r;
  r["acc"] = m.acc;
  r["comp"] = m.comp;
  r["cd"] = m.cd;
  r["prec"] = m.prec;
  r["recall"] = m.recall;
  r["f1"] = m.f1;
  r["threshold"] = m.threshold;
  r["config"] = config;
  return r;
}

Json cmd_delta(const DeltaArgs& a, const Globals& g, const Json& config, std::ostream& err) {
  const std::string ext = fs::path(a.input).extension().string();
  DeltaReport rep;
  std::string kind;
  std::size_t n = 0;
  if (ext == ".dist") {
    kind = "distance_matrix";
    const DistanceMatrix dm = read_distance_matrix(a.input);
    n = dm.size();
    if (n < 4) throw InvalidInput("delta needs at least 4 points, got " + std::to_string(n));
    rep = sampled_delta(dm, a.batch, a.trials, g.seed);
  } else {
    std::vector<Vec> points;
    if (ext == ".csv") {
      kind = "embedding";
      points = read_embedding_csv(a.input);
    } else {
      kind = "cloud";
      for (const auto& p : load(a.input, err)) points.emplace_back(p);
    }
    n = points.size();
    if (n < 4) throw InvalidInput("delta needs at least 4 points, got " + std::to_string(n));
    const Metric metric = a.metric == "hyperbolic" ? Metric::hyperbolic(require_curvature(g), g.eps)
                                                   : Metric::euclidean();
    rep = sampled_delta(points, metric, a.batch, a.trials, g.seed);
  }
  Json r;
  r["input_kind"] = kind;
  r["n_points"] = n;
  r["delta"] = rep.delta;
  r["diameter"] = rep.diameter;
  r["delta_rel"] = rep.delta_rel;
  r["base_point"] = rep.base_point;
  r["batches"] = rep.batches;
  r["samples_per_batch"] = rep.samples_per_batch;
  r["exact"] = rep.exact;
  if (rep.four_point_delta) r["four_point_delta"] = *rep.four_point_delta;
  r["config"] = config;
  return r;
}

Json cmd_synth(SynthArgs a, const Globals& g, const Json& config) {
  if (a.out_dir.empty()) throw UsageError("synth needs --out-dir");
  a.data.seed = g.seed;
  const HierarchyManifest m = generate_dataset(a.data);
  write_dataset(m, a.out_dir);
  Json r;
  r["manifest"] = (fs::path(a.out_dir) / "manifest.json").generic_string();
  r["samples"] = m.samples.size();
  r["categories"] = m.categories;
  r["config"] = config;
  return r;
}

Json loss_json(const LossReport& l) {
  Json j;
  j["l_z"] = l.l_z;
  j["l_t"] = l.l_t;
  j["total"] = l.total;
  return j;
}

Json cmd_embed(EmbedArgs a, const Globals& g, const Json& config, std::ostream& err) {
  if (a.out_dir.empty()) throw UsageError("embed needs --out-dir");
  require_curvature(g);
  TrainConfig& t = a.train;
  t.seed = g.seed;
  t.curvature_k = g.k;
  t.eps = g.eps;
  t.reg_norm = a.reg_norm == "euclidean" ? RegNorm::Euclidean : RegNorm::Hyperbolic;
  t.triplet_metric = a.triplet_metric == "geodesic" ? TripletMetric::Geodesic : TripletMetric::Tangent;
  try {
    t.validate();
  } catch (const InvalidInput& e) {
    throw UsageError(e.what());
  }
  if (t.learning_rate != kReferenceLearningRate) {
    err << "note: learning rate " << format_double(t.learning_rate) << " (reference setting "
        << format_double(kReferenceLearningRate) << ")\n";
  }

  const HierarchyManifest manifest = read_manifest(a.manifest, false);
  const TrainResult result = train(init_state(manifest, t), manifest, t);
  const HierarchyEval ev = evaluate_hierarchy(result.state, manifest, t);

  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec) throw IoError("cannot create " + a.out_dir + ": " + ec.message());
  const fs::path dir(a.out_dir);
  const std::string provenance = config.dump();
  Json artifacts = Json::array();
  write_loss_csv(dir / "loss.csv", result.curve, provenance);
  artifacts.push_back("loss.csv");
  write_embedding_csv(dir / "embedding.csv", result.state, manifest, provenance);
  artifacts.push_back("embedding.csv");
  if (t.dim == 2) {
    const auto disk = export_disk(result.state, manifest);
    write_disk_csv(dir / "disk.csv", disk, provenance);
    std::ofstream svg(dir / "embedding.svg", std::ios::binary);
    if (!svg) throw IoError("cannot open " + (dir / "embedding.svg").string() + " for writing");
    svg << render_disk_svg(disk, manifest.categories, provenance);
    if (!svg.flush()) throw IoError("failed writing embedding.svg");
    artifacts.push_back("disk.csv");
    artifacts.push_back("embedding.svg");
  }

  Json r;
  r["norm_order_rate"] = ev.norm_order_rate;
  r["chain_rate"] = ev.chain_rate;
  r["triplet_accuracy"] = ev.triplet_accuracy;
  r["n_pairs"] = ev.n_pairs;
  r["n_objects"] = ev.n_objects;
  r["n_heldout"] = ev.n_heldout;
  r["first_loss"] = loss_json(result.curve.front());
  r["final_loss"] = loss_json(result.curve.back());
  r["artifacts"] = artifacts;
  r["config"] = config;
  return r;
}

Json case_json(const GradCheckCase& c) {
  Json j;
  j["name"] = c.name;
  j["index"] = c.index;
  j["max_rel_error"] = c.max_rel_error;
  return j;
}

Json cmd_gradcheck(const GradArgs& a, const Globals& g, const Json& config, bool& breached) {
  const GradCheckSummary s = run_gradient_suite(g.seed, a.cases, a.h, a.flip_sign);
  breached = !(s.worst.max_rel_error <= kGradTolerance);
  Json per = Json::object();
  for (const auto& c : s.cases) {
    auto& slot = per[c.name];
    if (slot.is_null() || slot["max_rel_error"].get<double>() < c.max_rel_error) slot = case_json(c);
  }
  Json r;
  r["cases"] = s.cases.size();
  r["tolerance"] = kGradTolerance;
  r["worst"] = case_json(s.worst);
  r["worst_by_objective"] = per;
  r["pass"] = !breached;
  r["config"] = config;
  return r;
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hyperbolic point-cloud toolkit", "hyperpc"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Globals g;
  app.add_option("--config", g.config, "JSON file with option values; flags take precedence");
  app.add_option("--threads", g.threads, "Worker thread cap (0 = all cores)");
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--k", g.k, "Curvature (negative)");
  app.add_option("--eps", g.eps, "Boundary margin of the ball projection")->check(CLI::Range(1e-12, 0.1));
  app.add_option("-o,--output", g.output, "Write the JSON result here instead of stdout");

  PairArgs pair;
  auto add_pair = [&](CLI::App* sub) {
    sub->add_option("pred", pair.pred, "Predicted cloud (.xyz or .ply)")->required();
    sub->add_option("gt", pair.gt, "Ground-truth cloud (.xyz or .ply)")->required();
  };
  CLI::App* chamfer = app.add_subcommand("chamfer", "Euclidean Chamfer distance between two clouds");
  add_pair(chamfer);
  chamfer->add_option("--variant", pair.variant, "l1 or l2")->check(CLI::IsMember({"l1", "l2"}));
  CLI::App* hypercd = app.add_subcommand("hypercd", "Hyperbolic Chamfer distance between two clouds");
  add_pair(hypercd);
  CLI::App* metrics = app.add_subcommand("metrics", "Accuracy, completeness, precision, recall and F-score");
  add_pair(metrics);
  metrics->add_option("--threshold", pair.threshold, "Match distance")->check(CLI::PositiveNumber);

  DeltaArgs delta;
  CLI::App* delta_cmd = app.add_subcommand("delta", "Gromov delta-hyperbolicity of a point set");
  delta_cmd->add_option("input", delta.input, "Cloud (.xyz/.ply), embedding CSV (.csv) or distance matrix (.dist)")
      ->required();
  delta_cmd->add_option("--metric", delta.metric, "euclidean or hyperbolic")
      ->check(CLI::IsMember({"euclidean", "hyperbolic"}));
  delta_cmd->add_option("--batch", delta.batch, "Points per batch")->check(CLI::Range(std::size_t{4}, std::size_t{1} << 20));
  delta_cmd->add_option("--trials", delta.trials, "Number of batches")->check(CLI::Range(std::size_t{1}, std::size_t{1} << 20));

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate the synthetic part-whole dataset");
  synth_cmd->add_option("--out-dir", synth.out_dir, "Output directory");
  synth_cmd->add_option("--categories", synth.data.n_categories, "Number of categories (2-5)");
  synth_cmd->add_option("--objects", synth.data.objects_per_category, "Objects per category");
  synth_cmd->add_option("--parts", synth.data.parts_per_object, "Parts per object");
  synth_cmd->add_option("--points", synth.data.points_whole, "Points per whole cloud");

  EmbedArgs embed;
  CLI::App* embed_cmd = app.add_subcommand("embed", "Train hyperbolic part-whole embeddings");
  embed_cmd->add_option("manifest", embed.manifest, "manifest.json written by synth")->required();
  embed_cmd->add_option("--out-dir", embed.out_dir, "Output directory");
  embed_cmd->add_option("--epochs", embed.train.epochs, "Training epochs");
  embed_cmd->add_option("--steps-per-epoch", embed.train.steps_per_epoch, "Optimizer steps per epoch");
  embed_cmd->add_option("--batch-triplets", embed.train.batch_triplets, "Triplets sampled per step");
  embed_cmd->add_option("--lr", embed.train.learning_rate, "Learning rate");
  embed_cmd->add_option("--gamma0", embed.train.gamma0, "Adaptive margin scale");
  embed_cmd->add_option("--margin-eps", embed.train.margin_eps, "Triplet margin");
  embed_cmd->add_option("--dim", embed.train.dim, "Embedding dimension (2 also writes the disk SVG)");
  embed_cmd->add_option("--init-std", embed.train.init_std, "Std of the initial embedding rows");
  embed_cmd->add_option("--heldout", embed.train.heldout_fraction, "Held-out triplet fraction");
  embed_cmd->add_option("--reg-norm", embed.reg_norm, "hyperbolic or euclidean")
      ->check(CLI::IsMember({"hyperbolic", "euclidean"}));
  embed_cmd->add_option("--triplet-metric", embed.triplet_metric, "tangent or geodesic")
      ->check(CLI::IsMember({"tangent", "geodesic"}));

  GradArgs grad;
  CLI::App* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of the analytic gradients");
  grad_cmd->add_option("--cases", grad.cases, "Seeded configurations per objective")->check(CLI::Range(1, 1000000));
  grad_cmd->add_option("--step", grad.h, "Central-difference step")->check(CLI::Range(1e-9, 1e-3));
  grad_cmd->add_flag("--flip-sign-for-test", grad.flip_sign)->group("");

  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    if (!g.config.empty()) apply_config_file(app, *sub, g.config);
    set_thread_count(g.threads);
    const Json config = effective_config(app, *sub);
    const std::string name = sub->get_name();
    Json result;
    int code = kExitOk;
    if (name == "chamfer") {
      result = cmd_chamfer(pair, config, err);
    } else if (name == "hypercd") {
      result = cmd_hypercd(pair, g, config, err);
    } else if (name == "metrics") {
      result = cmd_metrics(pair, config, err);
    } else if (name == "delta") {
      result = cmd_delta(delta, g, config, err);
    } else if (name == "synth") {
      result = cmd_synth(synth, g, config);
    } else if (name == "embed") {
      result = cmd_embed(embed, g, config, err);
    } else {
      bool breached = false;
      result = cmd_gradcheck(grad, g, config, breached);
      if (breached) {
        err << "gradient check failed: worst case " << result["worst"].dump() << '\n';
        code = kExitNumerical;
      }
    }
    emit(result, g, out);
    return code;
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UnsupportedConfig& e) {
    err << "unsupported configuration: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitInput;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitInput;
  } catch (const InvalidInput& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitInput;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace hyperpc::cli
