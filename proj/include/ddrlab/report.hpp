#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ddrlab/grid_metric.hpp"

namespace ddrlab {

using json = nlohmann::json;

json to_json(const Point& p);
Point point_from_json(const json& j);

// Empirical constant with the instance that determines it.
struct ConstantFit {
  std::string name;
  double value = 0.0;
  std::size_t samples = 0;
  json witness = json::object();
  json details = json::object();

  json to_json() const;
};

// One tested inequality instance. margin = RHS - LHS, so the inequality
// holds when margin >= -tolerance.
struct HingeRecord {
  std::string check;
  std::string manifold;
  std::vector<std::pair<std::string, Point>> points;
  std::map<std::string, double> lengths;
  std::map<std::string, double> angles;
  double margin = 0.0;
  double tolerance = 0.0;
  std::optional<double> implied;  // per-instance implied constant, when defined

  bool holds() const { return margin >= -tolerance; }
  json to_json() const;
};

struct LemmaReport {
  std::string id;
  std::string manifold;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double worst_margin = 0.0;
  std::vector<json> witnesses;  // first failing records, capped
  std::vector<ConstantFit> fits;
  json tolerances = json::object();
  json details = json::object();

  static constexpr std::size_t kMaxWitnesses = 16;

  void add(const HingeRecord& r);
  bool passed() const { return failures == 0; }
  json to_json() const;
};

}  // namespace ddrlab
