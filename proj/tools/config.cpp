#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "ddrlab/comparison.hpp"
#include "scenario.hpp"

namespace ddrlab::cli {

std::string ConfigError::format(const std::string& what, int line) {
  return line > 0 ? "config line " + std::to_string(line) + ": " + what : "config: " + what;
}

namespace {

int line_of(const YAML::Node& n) {
  const auto mark = n.Mark();
  return mark.is_null() ? 0 : mark.line + 1;
}

void check_keys(const YAML::Node& map, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  if (!map.IsMap()) throw ConfigError(where + " must be a mapping", line_of(map));
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (auto a : allowed) ok = ok || a == key;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where, line_of(kv.first));
  }
}

template <class T>
T scalar(const YAML::Node& n, const std::string& key) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("key '" + key + "' has the wrong type", line_of(n));
  }
}

template <class T>
T get(const YAML::Node& map, const std::string& key, T fallback) {
  const YAML::Node n = map[key];
  return n ? scalar<T>(n, key) : fallback;
}

template <class T>
T require(const YAML::Node& map, const std::string& key, const std::string& where) {
  const YAML::Node n = map[key];
  if (!n) throw ConfigError("missing key '" + key + "' in " + where, line_of(map));
  return scalar<T>(n, key);
}

Point point(const YAML::Node& n, const std::string& key) {
  if (!n.IsSequence() || n.size() != 2) throw ConfigError("'" + key + "' must be [x, y]", line_of(n));
  return {scalar<double>(n[0], key), scalar<double>(n[1], key)};
}

Rect rect(const YAML::Node& n, const std::string& key) {
  if (!n.IsSequence() || n.size() != 2) {
    throw ConfigError("'" + key + "' must be [[x0, y0], [x1, y1]]", line_of(n));
  }
  Rect r{point(n[0], key), point(n[1], key)};
  if (!(r.hi.x() > r.lo.x() && r.hi.y() > r.lo.y())) throw ConfigError("'" + key + "' is empty", line_of(n));
  return r;
}

std::optional<std::uint64_t> seed_of(const YAML::Node& map) {
  const YAML::Node n = map["seed"];
  if (!n) return std::nullopt;
  return scalar<std::uint64_t>(n, "seed");
}

// YAML scalar or sequence to JSON: integers, then floats, then booleans, then strings.
json to_json_value(const YAML::Node& n, const std::string& key) {
  if (n.IsSequence()) {
    json arr = json::array();
    for (const auto& e : n) arr.push_back(to_json_value(e, key));
    return arr;
  }
  if (!n.IsScalar()) throw ConfigError("'" + key + "' must be a scalar or a list", line_of(n));
  long long i = 0;
  double d = 0.0;
  bool b = false;
  if (YAML::convert<long long>::decode(n, i)) return i;
  if (YAML::convert<double>::decode(n, d)) return d;
  if (YAML::convert<bool>::decode(n, b)) return b;
  return n.as<std::string>();
}

struct ExperimentKeys {
  std::vector<std::string_view> keys;
  bool randomized;
};

const std::map<std::string, ExperimentKeys>& experiment_table() {
  static const std::map<std::string, ExperimentKeys> table = [] {
    std::map<std::string, ExperimentKeys> t;
    for (const auto& id : comparison_sweep_ids()) {
      t[id] = {{"id", "seed", "trials", "k", "r", "c", "shortcut_c", "tolerance"}, true};
    }
    t["lipschitz"] = {{"id", "seed", "trials"}, true};
    t["holder"] = {{"id"}, false};
    t["invertibility"] = {{"id"}, false};
    t["reconstruct"] = {{"id", "q0", "max_radius", "neighbors", "bandwidth"}, false};
    t["angle"] = {{"id", "seed", "cases", "t0", "length"}, true};
    t["gauge"] = {{"id", "rotation", "translation"}, false};
    t["stability"] = {{"id", "seed", "levels"}, true};
    t["collar"] = {{"id", "seed", "depth", "rules", "pairs", "collar_points", "stations"}, true};
    t["eikonal-calibration"] = {{"id", "resolutions"}, false};
    return t;
  }();
  return table;
}

ManifoldSpec parse_manifold(const YAML::Node& n) {
  check_keys(n, {"kind", "scale", "radius", "domain", "h", "metric"}, "manifold");
  ManifoldSpec s;
  const auto kind = require<std::string>(n, "kind", "manifold");
  try {
    s.kind = parse_manifold_kind(kind);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what(), line_of(n["kind"]));
  }
  if (n["scale"] && n["radius"]) throw ConfigError("give 'scale' or 'radius', not both", line_of(n));
  s.scale = n["radius"] ? scalar<double>(n["radius"], "radius") : get<double>(n, "scale", 1.0);
  if (!(s.scale > 0.0)) throw ConfigError("manifold scale must be positive", line_of(n));
  const bool grid = s.kind == ManifoldKind::grid;
  for (const char* key : {"domain", "h", "metric"}) {
    if (!grid && n[key]) {
      throw ConfigError("key '" + std::string(key) + "' only applies to grid manifolds", line_of(n[key]));
    }
  }
  if (!grid) return s;
  s.domain = rect(n["domain"] ? n["domain"] : YAML::Load("[[0, 0], [1, 1]]"), "domain");
  s.h = require<double>(n, "h", "manifold");
  if (!(s.h > 0.0)) throw ConfigError("'h' must be positive", line_of(n["h"]));
  if (const YAML::Node m = n["metric"]) {
    check_keys(m, {"type", "amplitude", "width", "center", "tensor"}, "manifold.metric");
    s.metric.type = require<std::string>(m, "type", "manifold.metric");
    if (s.metric.type != "identity" && s.metric.type != "bump" && s.metric.type != "constant" &&
        s.metric.type != "half-plane") {
      throw ConfigError("unknown metric type '" + s.metric.type + "'", line_of(m["type"]));
    }
    s.metric.amplitude = get<double>(m, "amplitude", s.metric.amplitude);
    s.metric.width = get<double>(m, "width", s.metric.width);
    if (m["center"]) s.metric.center = point(m["center"], "center");
    if (const YAML::Node t = m["tensor"]) {
      if (!t.IsSequence() || t.size() != 3) throw ConfigError("'tensor' must be [g11, g12, g22]", line_of(t));
      s.metric.tensor << scalar<double>(t[0], "tensor"), scalar<double>(t[1], "tensor"),
          scalar<double>(t[1], "tensor"), scalar<double>(t[2], "tensor");
    }
  }
  return s;
}

std::string hex_digest(const std::string& text) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(text.data(), text.size())));
  return buf;
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t ScenarioConfig::component_seed(const std::string& tag,
                                             std::optional<std::uint64_t> own) const {
  if (own) return *own;
  if (!seed) throw ConfigError("missing seed for randomized component '" + tag + "'", 0);
  return mix(*seed ^ fnv1a(tag.data(), tag.size()));
}

void override_seed(ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.f_seed.reset();
  cfg.sources.seed.reset();
  for (auto& e : cfg.experiments) e.seed.reset();
}

const std::set<std::string>& registered_experiment_ids() {
  static const std::set<std::string> ids = [] {
    std::set<std::string> s;
    for (const auto& [id, _] : experiment_table()) s.insert(id);
    return s;
  }();
  return ids;
}

bool is_lemma_experiment(const std::string& id) {
  const auto& sweeps = comparison_sweep_ids();
  return std::find(sweeps.begin(), sweeps.end(), id) != sweeps.end() || id == "lipschitz" ||
         id == "holder" || id == "invertibility" || id == "collar" || id == "eikonal-calibration";
}

bool is_reconstruction_experiment(const std::string& id) {
  return id == "reconstruct" || id == "angle" || id == "gauge";
}

ScenarioConfig parse_config_text(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("parse error: " + e.msg, e.mark.is_null() ? 0 : e.mark.line + 1);
  }
  if (!root || root.IsNull()) throw ConfigError("empty config", 0);
  check_keys(root, {"version", "name", "seed", "jobs", "output", "manifold", "observation", "sources",
                    "experiments", "tolerances"},
             "top level");
  ScenarioConfig cfg;
  cfg.hash = hex_digest(text);
  cfg.version = get<int>(root, "version", kConfigVersion);
  if (cfg.version != kConfigVersion) {
    throw ConfigError("unsupported config version " + std::to_string(cfg.version), line_of(root["version"]));
  }
  cfg.name = get<std::string>(root, "name", "scenario");
  cfg.seed = seed_of(root);
  cfg.jobs = get<unsigned>(root, "jobs", 0u);
  if (root["output"]) cfg.output = get<std::string>(root, "output", "");
  if (!root["manifold"]) throw ConfigError("missing key 'manifold'", 0);
  cfg.manifold = parse_manifold(root["manifold"]);

  auto need_seed = [&](bool has_own, const std::string& what, int line) {
    if (!has_own && !cfg.seed) {
      throw ConfigError("missing seed: " + what + " is randomized; set 'seed' on it or at the top level", line);
    }
  };

  if (const YAML::Node f = root["observation"]) {
    check_keys(f, {"center", "radius", "count", "seed"}, "observation");
    cfg.has_observation = true;
    cfg.f_center = f["center"] ? point(f["center"], "center") : Point::Zero();
    cfg.f_radius = require<double>(f, "radius", "observation");
    cfg.f_count = require<std::size_t>(f, "count", "observation");
    cfg.f_seed = seed_of(f);
    need_seed(cfg.f_seed.has_value(), "observation", line_of(f));
  }
  if (const YAML::Node s = root["sources"]) {
    check_keys(s, {"count", "seed", "disk", "rect", "min_separation"}, "sources");
    cfg.has_sources = true;
    cfg.sources.count = require<std::size_t>(s, "count", "sources");
    cfg.sources.seed = seed_of(s);
    cfg.sources.min_separation = get<double>(s, "min_separation", 0.0);
    if (s["disk"] && s["rect"]) throw ConfigError("sources: give 'disk' or 'rect', not both", line_of(s));
    if (const YAML::Node d = s["disk"]) {
      check_keys(d, {"center", "radius"}, "sources.disk");
      cfg.sources.region.disk = true;
      cfg.sources.region.center = d["center"] ? point(d["center"], "center") : Point::Zero();
      cfg.sources.region.radius = require<double>(d, "radius", "sources.disk");
    } else if (const YAML::Node r = s["rect"]) {
      cfg.sources.region.disk = false;
      cfg.sources.region.rect = rect(r, "rect");
    } else {
      throw ConfigError("sources: missing region ('disk' or 'rect')", line_of(s));
    }
    need_seed(cfg.sources.seed.has_value(), "sources", line_of(s));
  }

  const YAML::Node ex = root["experiments"];
  if (!ex || !ex.IsSequence() || ex.size() == 0) {
    throw ConfigError("'experiments' must be a non-empty list", ex ? line_of(ex) : 0);
  }
  const auto& table = experiment_table();
  for (const auto& e : ex) {
    if (!e.IsMap()) throw ConfigError("experiment entries must be mappings", line_of(e));
    ExperimentSpec spec;
    spec.line = line_of(e);
    spec.id = require<std::string>(e, "id", "experiment");
    const auto it = table.find(spec.id);
    if (it == table.end()) throw ConfigError("unknown experiment id '" + spec.id + "'", line_of(e["id"]));
    for (const auto& kv : e) {
      const auto key = kv.first.as<std::string>();
      const auto& keys = it->second.keys;
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        throw ConfigError("unknown key '" + key + "' in experiment '" + spec.id + "'", line_of(kv.first));
      }
      if (key == "id") continue;
      if (key == "seed") {
        spec.seed = scalar<std::uint64_t>(kv.second, key);
        continue;
      }
      spec.params[key] = to_json_value(kv.second, key);
    }
    if (it->second.randomized) need_seed(spec.seed.has_value(), "experiment '" + spec.id + "'", spec.line);
    cfg.experiments.push_back(std::move(spec));
  }

  if (const YAML::Node t = root["tolerances"]) {
    if (!t.IsMap()) throw ConfigError("'tolerances' must be a mapping", line_of(t));
    for (const auto& kv : t) {
      const auto key = kv.first.as<std::string>();
      if (!table.contains(key)) throw ConfigError("unknown experiment id '" + key + "' in tolerances", line_of(kv.first));
      cfg.tolerances[key] = scalar<double>(kv.second, key);
    }
  }
  return cfg;
}

ScenarioConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string(), 0);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

Manifold build_manifold(const ManifoldSpec& spec) {
  switch (spec.kind) {
    case ManifoldKind::euclidean_plane:
      return Manifold::euclidean(spec.scale);
    case ManifoldKind::round_sphere:
      return Manifold::sphere(spec.scale);
    case ManifoldKind::hyperbolic_plane:
      return Manifold::hyperbolic(spec.scale);
    case ManifoldKind::grid:
      break;
  }
  const MetricSpec ms = spec.metric;
  std::function<Mat2(const Point&)> fn;
  if (ms.type == "identity") {
    fn = [](const Point&) { return Mat2(Mat2::Identity()); };
  } else if (ms.type == "bump") {
    fn = [ms](const Point& p) {
      const double c = 1.0 + ms.amplitude * std::exp(-ms.width * (p - ms.center).squaredNorm());
      return Mat2(c * c * Mat2::Identity());
    };
  } else if (ms.type == "constant") {
    fn = [ms](const Point&) { return ms.tensor; };
  } else {
    // upper half-plane, curvature -1
    fn = [](const Point& p) { return Mat2(Mat2::Identity() / (p.y() * p.y())); };
  }
  const double s2 = spec.scale * spec.scale;
  return make_grid_manifold(spec.domain, [fn, s2](const Point& p) { return Mat2(s2 * fn(p)); }, spec.h);
}

}  // namespace ddrlab::cli
