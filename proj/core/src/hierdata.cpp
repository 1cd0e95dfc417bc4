#include "hyperpc/hierdata.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <Eigen/Geometry>
#include <json.hpp>

#include "hyperpc/cloud_io.hpp"
#include "hyperpc/errors.hpp"
#include "hyperpc/random.hpp"

namespace hyperpc {
namespace {

using Json = nlohmann::ordered_json;
constexpr double kPi = std::numbers::pi;

struct Placed {
  Primitive primitive;
  Eigen::Vector3d offset;
};

Primitive box(double sx, double sy, double sz) { return {PrimitiveKind::Box, {sx, sy, sz}}; }
Primitive disk(double r) { return {PrimitiveKind::Disk, {r, 0.0, 0.0}}; }
Primitive cylinder(double r, double h) { return {PrimitiveKind::Cylinder, {r, h, 0.0}}; }

// Objects stand on z = -0.5 and reach roughly z = +0.5. Primitive order is
// the order in which parts accumulate.
std::vector<Placed> category_template(const std::string& name) {
  std::vector<Placed> t;
  if (name == "table") {
    for (double sx : {-0.4, 0.4})
      for (double sy : {-0.25, 0.25}) t.push_back({cylinder(0.03, 0.7), {sx, sy, -0.15}});
    t.push_back({box(1.0, 0.6, 0.05), {0.0, 0.0, 0.225}});
  } else if (name == "chair") {
    for (double sx : {-0.2, 0.2})
      for (double sy : {-0.2, 0.2}) t.push_back({cylinder(0.025, 0.45), {sx, sy, -0.275}});
    t.push_back({box(0.5, 0.5, 0.05), {0.0, 0.0, -0.025}});
    t.push_back({box(0.5, 0.05, 0.5), {0.0, -0.225, 0.25}});
  } else if (name == "lamp") {
    t.push_back({disk(0.15), {0.0, 0.0, -0.5}});
    t.push_back({cylinder(0.015, 0.8), {0.0, 0.0, -0.1}});
    t.push_back({cylinder(0.2, 0.25), {0.0, 0.0, 0.35}});
  } else if (name == "stool") {
    for (int k = 0; k < 3; ++k) {
      const double a = 2.0 * kPi * k / 3.0;
      t.push_back({cylinder(0.025, 0.6), {0.18 * std::cos(a), 0.18 * std::sin(a), -0.2}});
    }
    t.push_back({cylinder(0.22, 0.04), {0.0, 0.0, 0.12}});
  } else if (name == "shelf") {
    for (double sx : {-0.4, 0.4}) t.push_back({box(0.04, 0.3, 1.0), {sx, 0.0, 0.0}});
    for (double z : {-0.4, 0.0, 0.4}) t.push_back({box(0.8, 0.3, 0.03), {0.0, 0.0, z}});
  } else {
    throw InvalidInput("unknown category template '" + name + "'");
  }
  return t;
}

double surface_area(const Primitive& p) {
  switch (p.kind) {
    case PrimitiveKind::Box:
      return 2.0 * (p.size.x() * p.size.y() + p.size.x() * p.size.z() + p.size.y() * p.size.z());
    case PrimitiveKind::Disk:
      return kPi * p.size.x() * p.size.x();
    case PrimitiveKind::Cylinder:
      return 2.0 * kPi * p.size.x() * p.size.y() + 2.0 * kPi * p.size.x() * p.size.x();
  }
  return 0.0;
}

Point3 sample_disk(Rng& rng, double r, double z) {
  const double rad = r * std::sqrt(rng.uniform());
  const double ang = 2.0 * kPi * rng.uniform();
  return {rad * std::cos(ang), rad * std::sin(ang), z};
}

Point3 sample_box(Rng& rng, const Eigen::Vector3d& s) {
  const double axy = s.x() * s.y(), axz = s.x() * s.z(), ayz = s.y() * s.z();
  const double pick = rng.uniform() * 2.0 * (axy + axz + ayz);
  const double side = rng.uniform() < 0.5 ? -0.5 : 0.5;
  const double u = rng.uniform() - 0.5;
  const double v = rng.uniform() - 0.5;
  if (pick < 2.0 * axy) return {u * s.x(), v * s.y(), side * s.z()};
  if (pick < 2.0 * (axy + axz)) return {u * s.x(), side * s.y(), v * s.z()};
  return {side * s.x(), u * s.y(), v * s.z()};
}

Point3 sample_cylinder(Rng& rng, double r, double h) {
  const double lateral = 2.0 * kPi * r * h;
  const double cap = kPi * r * r;
  const double pick = rng.uniform() * (lateral + 2.0 * cap);
  if (pick < lateral) {
    const double ang = 2.0 * kPi * rng.uniform();
    return {r * std::cos(ang), r * std::sin(ang), (rng.uniform() - 0.5) * h};
  }
  return sample_disk(rng, r, pick < lateral + cap ? -0.5 * h : 0.5 * h);
}

// Largest-remainder allocation of `total` points proportional to `weights`.
std::vector<std::size_t> allocate(const std::vector<double>& weights, std::size_t total) {
  double sum = 0.0;
  for (double w : weights) sum += w;
  std::vector<std::size_t> counts(weights.size());
  std::vector<std::pair<double, std::size_t>> remainder;
  std::size_t used = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = total * weights[i] / sum;
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    used += counts[i];
    remainder.push_back({exact - std::floor(exact), i});
  }
  std::stable_sort(remainder.begin(), remainder.end(), [](auto a, auto b) { return a.first > b.first; });
  for (std::size_t k = 0; used < total; ++k, ++used) ++counts[remainder[k % remainder.size()].second];
  return counts;
}

// Part sizes: cuts at primitive boundaries closest to even fractions of the
// whole, falling back to the exact fraction when boundaries run out.
std::vector<std::size_t> part_sizes(const std::vector<std::size_t>& per_primitive, int parts) {
  std::vector<std::size_t> boundaries;
  std::size_t acc = 0;
  for (std::size_t c : per_primitive) {
    acc += c;
    boundaries.push_back(acc);
  }
  const std::size_t total = acc;
  std::vector<std::size_t> cuts;
  std::size_t prev = 0;
  for (int k = 1; k <= parts; ++k) {
    const double target = static_cast<double>(total) * k / (parts + 1);
    // Leave room for the remaining parts to stay strictly increasing and below total.
    const std::size_t hi = total - static_cast<std::size_t>(parts - k + 1);
    std::optional<std::size_t> best;
    for (std::size_t b : boundaries) {
      if (b <= prev || b > hi) continue;
      if (!best || std::abs(static_cast<double>(b) - target) < std::abs(static_cast<double>(*best) - target)) best = b;
    }
    std::size_t cut = static_cast<std::size_t>(std::llround(target));
    if (best && std::abs(static_cast<double>(*best) - target) <= 0.5 * total / (parts + 1)) cut = *best;
    cut = std::clamp(cut, prev + 1, hi);
    cuts.push_back(cut);
    prev = cut;
  }
  return cuts;
}

std::string object_stem(const std::string& category, int object) {
  std::ostringstream os;
  os << category << '_';
  os.width(3);
  os.fill('0');
  os << object;
  return os.str();
}

Json config_json(const DatasetConfig& c) {
  Json j;
  j["n_categories"] = c.n_categories;
  j["objects_per_category"] = c.objects_per_category;
  j["parts_per_object"] = c.parts_per_object;
  j["points_whole"] = c.points_whole;
  j["seed"] = c.seed;
  return j;
}

using PointKey = std::array<double, 3>;

PointKey key(const Point3& p) { return {p.x(), p.y(), p.z()}; }

}  // namespace

const std::vector<std::string>& category_names() {
  static const std::vector<std::string> names = {"table", "chair", "lamp", "stool", "shelf"};
  return names;
}

std::string to_string(Role role) { return role == Role::Part ? "part" : "whole"; }

PointCloud sample_primitive(const Primitive& primitive, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidInput("sample_primitive needs n >= 1");
  const Eigen::Vector3d& s = primitive.size;
  const bool ok = primitive.kind == PrimitiveKind::Box        ? (s.array() > 0.0).all()
                  : primitive.kind == PrimitiveKind::Disk     ? s.x() > 0.0
                                                              : s.x() > 0.0 && s.y() > 0.0;
  if (!ok || !s.allFinite()) throw InvalidInput("primitive dimensions must be positive");

  Rng rng(seed);
  std::vector<Point3> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    switch (primitive.kind) {
      case PrimitiveKind::Box:
        pts.push_back(sample_box(rng, s));
        break;
      case PrimitiveKind::Disk:
        pts.push_back(sample_disk(rng, s.x(), 0.0));
        break;
      case PrimitiveKind::Cylinder:
        pts.push_back(sample_cylinder(rng, s.x(), s.y()));
        break;
    }
  }
  return PointCloud(std::move(pts));
}

HierarchyManifest generate_dataset(const DatasetConfig& config) {
  const int n_templates = static_cast<int>(category_names().size());
  if (config.n_categories < 2 || config.n_categories > n_templates) {
    throw InvalidInput("n_categories must lie in [2, " + std::to_string(n_templates) + "]");
  }
  if (config.objects_per_category < 1) throw InvalidInput("objects_per_category must be at least 1");
  if (config.parts_per_object < 2) throw InvalidInput("parts_per_object must be at least 2");
  if (config.points_whole < 2 * (config.parts_per_object + 1) || config.points_whole < 16) {
    throw InvalidInput("points_whole too small for the requested number of parts");
  }

  HierarchyManifest m;
  m.seed = config.seed;
  m.config = config;
  for (int c = 0; c < config.n_categories; ++c) m.categories.push_back(category_names()[c]);

  for (int c = 0; c < config.n_categories; ++c) {
    const std::string& category = m.categories[c];
    const auto layout = category_template(category);
    std::vector<double> areas;
    for (const auto& p : layout) areas.push_back(surface_area(p.primitive));
    const auto counts = allocate(areas, static_cast<std::size_t>(config.points_whole));
    const auto cuts = part_sizes(counts, config.parts_per_object);

    for (int o = 0; o < config.objects_per_category; ++o) {
      const std::uint64_t object_seed =
          mix64(config.seed ^ mix64(static_cast<std::uint64_t>(c) * 1000003ULL + static_cast<std::uint64_t>(o)));
      Rng jitter(object_seed);
      const double scale = jitter.uniform(0.8, 1.2);
      const double angle = jitter.uniform(0.0, 2.0 * kPi);
      const Eigen::Matrix3d rot = Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitZ()).toRotationMatrix();

      std::vector<Point3> whole;
      whole.reserve(static_cast<std::size_t>(config.points_whole));
      for (std::size_t k = 0; k < layout.size(); ++k) {
        if (counts[k] == 0) continue;
        const auto local = sample_primitive(layout[k].primitive, counts[k], mix64(object_seed + 1 + k));
        for (const auto& p : local) whole.push_back(scale * (rot * (p + layout[k].offset)));
      }

      const std::string stem = object_stem(category, o);
      SampleRecord w;
      w.id = stem + "_whole";
      w.category = category;
      w.role = Role::Whole;
      w.n_points = static_cast<int>(whole.size());
      w.cloud_path = "clouds/" + w.id + ".xyz";
      for (int k = 0; k < config.parts_per_object; ++k) {
        SampleRecord part;
        part.id = stem + "_part" + std::to_string(k + 1);
        part.category = category;
        part.role = Role::Part;
        part.n_points = static_cast<int>(cuts[k]);
        part.parent_id = w.id;
        part.cloud_path = "clouds/" + part.id + ".xyz";
        part.cloud = PointCloud(std::vector<Point3>(whole.begin(), whole.begin() + static_cast<std::ptrdiff_t>(cuts[k])));
        m.samples.push_back(std::move(part));
      }
      w.cloud = PointCloud(std::move(whole));
      // Whole goes after its parts so that every object is contiguous.
      m.samples.push_back(std::move(w));
    }
  }
  m.validate();
  return m;
}

std::optional<std::size_t> HierarchyManifest::find(const std::string& id) const {
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (samples[i].id == id) return i;
  return std::nullopt;
}

void HierarchyManifest::validate() const {
  std::set<std::string> cats(categories.begin(), categories.end());
  if (cats.size() != categories.size()) throw InvalidInput("duplicate category labels");
  if (cats.size() < 2) throw InvalidInput("manifest needs at least 2 categories: triplet mining has no negatives");

  std::map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (!by_id.emplace(s.id, i).second) throw InvalidInput("duplicate sample id '" + s.id + "'");
    if (!cats.count(s.category)) throw InvalidInput("sample '" + s.id + "' has unknown category");
    if (s.n_points < 1) throw InvalidInput("sample '" + s.id + "' has no points");
    if (s.cloud && s.cloud->size() != static_cast<std::size_t>(s.n_points)) {
      throw InvalidInput("sample '" + s.id + "' n_points does not match its cloud");
    }
  }

  std::map<std::string, std::vector<std::size_t>> parts_of;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.role == Role::Whole) {
      if (s.parent_id) throw InvalidInput("whole '" + s.id + "' must not have a parent");
      continue;
    }
    if (!s.parent_id) throw InvalidInput("part '" + s.id + "' has no parent");
    const auto it = by_id.find(*s.parent_id);
    if (it == by_id.end()) throw InvalidInput("part '" + s.id + "' references missing parent");
    const auto& parent = samples[it->second];
    if (parent.role != Role::Whole) throw InvalidInput("parent of '" + s.id + "' is not a whole");
    if (parent.category != s.category) throw InvalidInput("part '" + s.id + "' crosses categories");
    parts_of[parent.id].push_back(i);
  }

  for (auto& [whole_id, parts] : parts_of) {
    const auto& whole = samples[by_id[whole_id]];
    std::stable_sort(parts.begin(), parts.end(),
                     [&](std::size_t a, std::size_t b) { return samples[a].n_points < samples[b].n_points; });
    for (std::size_t k = 0; k < parts.size(); ++k) {
      const int n = samples[parts[k]].n_points;
      const int next = k + 1 < parts.size() ? samples[parts[k + 1]].n_points : whole.n_points;
      if (!(n < next)) throw InvalidInput("object '" + whole_id + "' does not have strictly increasing part sizes");
    }
    // Subset chain P1 c P2 c ... c W, by exact coordinate identity.
    const SampleRecord* outer = &whole;
    for (auto k = parts.rbegin(); k != parts.rend(); ++k) {
      const SampleRecord& inner = samples[*k];
      if (inner.cloud && outer->cloud) {
        std::set<PointKey> keys;
        for (const auto& p : *outer->cloud) keys.insert(key(p));
        for (const auto& p : *inner.cloud) {
          if (!keys.count(key(p))) throw InvalidInput("part '" + inner.id + "' is not a subset of '" + outer->id + "'");
        }
      }
      outer = &inner;
    }
  }
}

void write_dataset(const HierarchyManifest& manifest, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "clouds", ec);
  if (ec) throw IoError("cannot create " + (out_dir / "clouds").string() + ": " + ec.message());

  Json doc;
  doc["seed"] = manifest.seed;
  doc["categories"] = manifest.categories;
  if (manifest.config) doc["config"] = config_json(*manifest.config);
  Json samples = Json::array();
  for (const auto& s : manifest.samples) {
    Json j;
    j["id"] = s.id;
    j["category"] = s.category;
    j["role"] = to_string(s.role);
    j["n_points"] = s.n_points;
    if (s.parent_id) j["parent_id"] = *s.parent_id;
    j["cloud_path"] = s.cloud_path;
    samples.push_back(std::move(j));
    if (s.cloud) write_xyz(out_dir / s.cloud_path, *s.cloud, s.id);
  }
  doc["samples"] = std::move(samples);

  const auto path = out_dir / "manifest.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

HierarchyManifest read_manifest(const std::filesystem::path& manifest_path, bool load_clouds) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw IoError("cannot open " + manifest_path.string() + " for reading");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string file = manifest_path.string();

  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
    throw ParseError(file, line, e.what());
  }

  HierarchyManifest m;
  std::string where = "manifest";
  try {
    m.seed = doc.at("seed").get<std::uint64_t>();
    m.categories = doc.at("categories").get<std::vector<std::string>>();
    if (doc.contains("config")) {
      const auto& c = doc["config"];
      DatasetConfig cfg;
      cfg.n_categories = c.at("n_categories").get<int>();
      cfg.objects_per_category = c.at("objects_per_category").get<int>();
      cfg.parts_per_object = c.at("parts_per_object").get<int>();
      cfg.points_whole = c.at("points_whole").get<int>();
      cfg.seed = c.at("seed").get<std::uint64_t>();
      m.config = cfg;
    }
    const auto& samples = doc.at("samples");
    for (std::size_t i = 0; i < samples.size(); ++i) {
      where = "samples[" + std::to_string(i) + "]";
      const auto& j = samples[i];
      SampleRecord s;
      s.id = j.at("id").get<std::string>();
      s.category = j.at("category").get<std::string>();
      const auto role = j.at("role").get<std::string>();
      if (role == "part") {
        s.role = Role::Part;
      } else if (role == "whole") {
        s.role = Role::Whole;
      } else {
        throw InvalidInput("role must be 'part' or 'whole'");
      }
      s.n_points = j.at("n_points").get<int>();
      if (j.contains("parent_id") && !j["parent_id"].is_null()) s.parent_id = j["parent_id"].get<std::string>();
      s.cloud_path = j.at("cloud_path").get<std::string>();
      m.samples.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(file, 0, where + ": " + e.what());
  } catch (const InvalidInput& e) {
    throw ParseError(file, 0, where + ": " + e.what());
  }

  if (load_clouds) {
    const auto dir = manifest_path.parent_path();
    for (auto& s : m.samples) s.cloud = read_xyz(dir / s.cloud_path);
  }
  try {
    m.validate();
  } catch (const InvalidInput& e) {
    throw ParseError(file, 0, e.what());
  }
  return m;
}

}  // namespace hyperpc
