#include "ddrlab/report.hpp"

#include <algorithm>

#include "ddrlab/errors.hpp"

namespace ddrlab {

json to_json(const Point& p) { return json::array({p.x(), p.y()}); }

Point point_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw InvalidArgument("point must be a 2-element array");
  return {j[0].get<double>(), j[1].get<double>()};
}

json ConstantFit::to_json() const {
  return {{"name", name}, {"value", value}, {"samples", samples}, {"witness", witness},
          {"details", details}};
}

json HingeRecord::to_json() const {
  json pts = json::object();
  for (const auto& [name, p] : points) pts[name] = ddrlab::to_json(p);
  json out = {{"check", check},         {"manifold", manifold}, {"points", pts},
              {"lengths", lengths},     {"angles", angles},     {"margin", margin},
              {"tolerance", tolerance}, {"holds", holds()}};
  if (implied) out["implied"] = *implied;
  return out;
}

void LemmaReport::add(const HingeRecord& r) {
  worst_margin = trials == 0 ? r.margin : std::min(worst_margin, r.margin);
  ++trials;
  if (!r.holds()) {
    ++failures;
    if (witnesses.size() < kMaxWitnesses) witnesses.push_back(r.to_json());
  }
}

json LemmaReport::to_json() const {
  json fit_list = json::array();
  for (const auto& f : fits) fit_list.push_back(f.to_json());
  return {{"id", id},
          {"manifold", manifold},
          {"trials", trials},
          {"failures", failures},
          {"worst_margin", worst_margin},
          {"witnesses", witnesses},
          {"fits", fit_list},
          {"tolerances", tolerances},
          {"details", details}};
}

}  // namespace ddrlab
