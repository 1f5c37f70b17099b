#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ddrlab/ddr.hpp"
#include "ddrlab/errors.hpp"
#include "ddrlab/manifold.hpp"
#include "ddrlab/report.hpp"

namespace ddrlab::cli {

inline constexpr int kConfigVersion = 1;

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line) : Error(format(what, line)), line(line) {}
  int line;  // 1-based, 0 when unknown

 private:
  static std::string format(const std::string& what, int line);
};

struct MetricSpec {
  std::string type = "identity";  // identity | bump | constant | half-plane
  double amplitude = 1.0;         // bump: c = 1 + amplitude exp(-width |y - center|^2)
  double width = 8.0;
  Point center{0.5, 0.5};
  Mat2 tensor = Mat2::Identity();  // constant
};

struct ManifoldSpec {
  ManifoldKind kind = ManifoldKind::euclidean_plane;
  double scale = 1.0;  // sphere radius or model metric scale
  Rect domain{{0, 0}, {1, 1}};
  double h = 1.0 / 64;
  MetricSpec metric;
};

struct RegionSpec {
  bool disk = true;
  Point center = Point::Zero();
  double radius = 1.0;
  Rect rect{{0, 0}, {1, 1}};
};

struct SourceSpec {
  std::size_t count = 0;
  RegionSpec region;
  double min_separation = 0.0;
  std::optional<std::uint64_t> seed;
};

struct ExperimentSpec {
  std::string id;
  int line = 0;
  std::optional<std::uint64_t> seed;
  json params = json::object();  // validated per id
};

struct ScenarioConfig {
  int version = kConfigVersion;
  std::string name;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 0;
  std::optional<std::filesystem::path> output;
  ManifoldSpec manifold;
  bool has_observation = false;
  Point f_center = Point::Zero();
  double f_radius = 0.0;
  std::size_t f_count = 0;
  std::optional<std::uint64_t> f_seed;
  bool has_sources = false;
  SourceSpec sources;
  std::vector<ExperimentSpec> experiments;
  json tolerances = json::object();  // per experiment id overrides
  std::string hash;                  // hex digest of the config text

  // Seed of a randomized component: its own seed, else derived from the
  // scenario seed and the component tag.
  std::uint64_t component_seed(const std::string& tag, std::optional<std::uint64_t> own = {}) const;
};

// --seed: replaces the scenario seed and drops component seeds so every
// randomized part derives from the new value.
void override_seed(ScenarioConfig& cfg, std::uint64_t seed);

const std::set<std::string>& registered_experiment_ids();
bool is_lemma_experiment(const std::string& id);
bool is_reconstruction_experiment(const std::string& id);

// YAML, or JSON (a subset of the same tree).
ScenarioConfig parse_config(const std::filesystem::path& path);
ScenarioConfig parse_config_text(const std::string& text);

Manifold build_manifold(const ManifoldSpec& spec);

enum class Status { pass, fail, report_only };
std::string to_string(Status s);

struct ExperimentResult {
  std::string id;
  std::size_t index = 0;
  bool asserted = false;
  Status status = Status::report_only;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  json summary = json::object();
  std::vector<ConstantFit> fits;
  std::vector<json> witnesses;
  // Plot-ready series: column names and rows.
  std::map<std::string, std::pair<std::vector<std::string>, std::vector<std::vector<double>>>> series;

  json to_json(bool with_wall_clock) const;
};

struct RunReport {
  std::string name;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<ExperimentResult> experiments;
  double wall_seconds = 0.0;
  bool strict = false;

  bool failed() const;
  json to_json(bool with_wall_clock = true) const;
};

struct RunOptions {
  std::optional<std::filesystem::path> out;
  bool strict = false;
  // Empty runs everything; otherwise only matching experiments.
  std::function<bool(const std::string&)> filter;
};

// Executes experiments in declaration order and writes
// summary.json, records.jsonl and one CSV per series into the output directory.
RunReport run_scenario(const ScenarioConfig& cfg, const RunOptions& options = {});

// Two-column (or grouped) CSV of one series, rows in deterministic order.
void emit_plot_data(const ExperimentResult& result, const std::string& kind,
                    const std::filesystem::path& path);

}  // namespace ddrlab::cli
