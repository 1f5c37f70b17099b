#include "scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>

#include <Eigen/Geometry>

#include "ddrlab/boundary.hpp"
#include "ddrlab/comparison.hpp"
#include "ddrlab/eikonal.hpp"
#include "ddrlab/parallel.hpp"
#include "ddrlab/random.hpp"
#include "ddrlab/reconstruct.hpp"

namespace ddrlab::cli {

using std::numbers::pi;

std::string to_string(Status s) {
  switch (s) {
    case Status::pass:
      return "pass";
    case Status::fail:
      return "fail";
    case Status::report_only:
      return "report-only";
  }
  return "?";
}

json ExperimentResult::to_json(bool with_wall_clock) const {
  json fit_list = json::array();
  for (const auto& f : fits) fit_list.push_back(f.to_json());
  json j = {{"id", id},          {"index", index},       {"asserted", asserted},
            {"status", cli::to_string(status)}, {"warnings", warnings}, {"seed", seed},
            {"summary", summary}, {"fits", fit_list},    {"witnesses", witnesses}};
  if (with_wall_clock) j["wall_seconds"] = wall_seconds;
  return j;
}

bool RunReport::failed() const {
  return std::any_of(experiments.begin(), experiments.end(),
                     [](const ExperimentResult& e) { return e.status == Status::fail; });
}

json RunReport::to_json(bool with_wall_clock) const {
  json list = json::array();
  for (const auto& e : experiments) list.push_back(e.to_json(with_wall_clock));
  json j = {{"name", name},
            {"config_hash", config_hash},
            {"seed", seed},
            {"config_version", kConfigVersion},
            {"strict", strict},
            {"status", failed() ? "fail" : "pass"},
            {"experiments", list}};
  if (with_wall_clock) j["wall_seconds"] = wall_seconds;
  return j;
}

void emit_plot_data(const ExperimentResult& result, const std::string& kind,
                    const std::filesystem::path& path) {
  const auto it = result.series.find(kind);
  if (it == result.series.end()) {
    throw InvalidArgument("emit_plot_data: experiment '" + result.id + "' has no series '" + kind + "'");
  }
  const auto& [columns, rows] = it->second;
  if (rows.empty()) throw InvalidArgument("emit_plot_data: series '" + kind + "' is empty");
  std::ofstream out(path);
  if (!out) throw InvalidArgument("emit_plot_data: cannot write " + path.string());
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  out.precision(17);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
    out << '\n';
  }
}

namespace {

// Everything an experiment may need, built lazily and shared across experiments.
class Context {
 public:
  Context(const ScenarioConfig& cfg) : cfg_(cfg), m_(build_manifold(cfg.manifold)) {}

  const ScenarioConfig& cfg() const { return cfg_; }
  const Manifold& manifold() const { return m_; }

  const ObservationSample& sample() {
    if (!cfg_.has_observation) throw InvalidArgument("experiment needs an 'observation' section");
    if (!f_) {
      f_ = sample_observation_domain(
          m_, {cfg_.f_center, cfg_.f_radius, cfg_.f_count, cfg_.component_seed("observation", cfg_.f_seed)});
    }
    return *f_;
  }

  const std::vector<Point>& sources() {
    if (!cfg_.has_sources) throw InvalidArgument("experiment needs a 'sources' section");
    if (!xs_) xs_ = draw_sources();
    return *xs_;
  }

  const DdrDataset& dataset() {
    if (!ds_) {
      const auto& f = sample();
      ds_ = ddr_dataset(m_, f, sources(), cfg_.jobs);
    }
    return *ds_;
  }

  DistanceOracle oracle() const {
    const Manifold m = m_;
    return [m](const Point& a, const Point& b) { return distance(m, a, b); };
  }

  Point region_point(Rng& rng) const {
    const RegionSpec& r = cfg_.sources.region;
    if (!r.disk) {
      return {rng.uniform(r.rect.lo.x(), r.rect.hi.x()), rng.uniform(r.rect.lo.y(), r.rect.hi.y())};
    }
    const double rad = r.radius * std::sqrt(rng.uniform()), th = rng.uniform(0.0, 2.0 * pi);
    if (m_.kind() == ManifoldKind::round_sphere) {
      return rad == 0.0 ? r.center : exp_map(m_, {r.center, rad * m_.unit_direction(r.center, th).components});
    }
    return r.center + rad * Point(std::cos(th), std::sin(th));
  }

 private:
  std::vector<Point> draw_sources() const {
    Rng rng(cfg_.component_seed("sources", cfg_.sources.seed));
    std::vector<Point> xs;
    const std::size_t max_tries = 1000 * cfg_.sources.count + 1000;
    for (std::size_t tries = 0; xs.size() < cfg_.sources.count; ++tries) {
      if (tries > max_tries) {
        throw InvalidArgument("sources: could not place " + std::to_string(cfg_.sources.count) +
                              " points with the requested separation");
      }
      const Point p = region_point(rng);
      if (!m_.contains(p)) throw OutsideDomain("sources: region leaves the manifold domain");
      bool ok = true;
      for (const auto& q : xs) ok = ok && distance(m_, p, q) >= cfg_.sources.min_separation;
      if (ok) xs.push_back(p);
    }
    return xs;
  }

  const ScenarioConfig& cfg_;
  Manifold m_;
  std::optional<ObservationSample> f_;
  std::optional<std::vector<Point>> xs_;
  std::optional<DdrDataset> ds_;
};

double num(const json& p, const char* key, double fallback) {
  if (!p.contains(key)) return fallback;
  if (!p[key].is_number()) throw InvalidArgument(std::string("'") + key + "' must be a number");
  return p[key].get<double>();
}

std::size_t count(const json& p, const char* key, std::size_t fallback) {
  if (!p.contains(key)) return fallback;
  if (!p[key].is_number_integer() || p[key].get<long long>() < 0) {
    throw InvalidArgument(std::string("'") + key + "' must be a nonnegative integer");
  }
  return p[key].get<std::size_t>();
}

std::vector<double> numbers(const json& p, const char* key, std::vector<double> fallback) {
  if (!p.contains(key)) return fallback;
  if (!p[key].is_array()) throw InvalidArgument(std::string("'") + key + "' must be a list");
  std::vector<double> out;
  for (const auto& v : p[key]) {
    if (!v.is_number()) throw InvalidArgument(std::string("'") + key + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

double grid_eps(const Manifold& m) {
  return m.analytic() ? 0.0 : solver_tolerance(m.grid(), default_backend(m.grid()));
}

Mat2 chart_metric(const Manifold& m, const Point& p) {
  if (m.kind() == ManifoldKind::round_sphere) {
    const double r = m.scale(), c = std::cos(p.y());
    Mat2 g;
    g << r * r * c * c, 0.0, 0.0, r * r;
    return g;
  }
  return m.metric(p);
}

void finish_asserted(ExperimentResult& r, bool ok) {
  r.asserted = true;
  r.status = ok ? Status::pass : Status::fail;
}

// ---- experiments --------------------------------------------------------------------------

void run_sweep(Context& ctx, const ExperimentSpec& e, ExperimentResult& r) {
  SweepOptions o;
  o.trials = count(e.params, "trials", o.trials);
  o.seed = r.seed;
  o.k_unit = num(e.params, "k", o.k_unit);
  o.r_unit = num(e.params, "r", o.r_unit);
  o.c = num(e.params, "c", o.c);
  o.shortcut_c = num(e.params, "shortcut_c", o.shortcut_c);
  if (e.params.contains("tolerance")) {
    o.tolerance = num(e.params, "tolerance", 0.0);
  } else if (ctx.cfg().tolerances.contains(e.id)) {
    o.tolerance = ctx.cfg().tolerances[e.id].get<double>();
  }
  const LemmaReport rep = run_comparison_sweep(e.id, ctx.manifold(), o);
  r.summary = rep.to_json();
  r.summary.erase("witnesses");
  r.summary.erase("fits");
  r.fits = rep.fits;
  r.witnesses = rep.witnesses;
  finish_asserted(r, rep.passed());
  std::vector<std::vector<double>> rows;
  for (const auto& f : rep.fits) rows.push_back({f.value, static_cast<double>(f.samples)});
  if (!rows.empty()) r.series["fits"] = {{"value", "samples"}, rows};
}

void run_lipschitz(Context& ctx, const ExperimentSpec& e, ExperimentResult& r) {
  const auto& m = ctx.manifold();
  const auto& f = ctx.sample();
  const std::size_t trials = count(e.params, "trials", 1000);
  const double slack = ctx.cfg().tolerances.contains(e.id) ? ctx.cfg().tolerances[e.id].get<double>()
                                                           : (m.analytic() ? 1e-9 : 4.0 * grid_eps(m));
  Rng rng(r.seed);
  std::vector<std::pair<Point, Point>> pairs(trials);
  for (auto& [x, y] : pairs) {
    x = ctx.region_point(rng);
    y = ctx.region_point(rng);
  }
  std::vector<double> sup(trials), d(trials);
  parallel_for(
      trials,
      [&](std::size_t k) {
        sup[k] = sup_distance(ddr_of_point(m, f, pairs[k].first), ddr_of_point(m, f, pairs[k].second));
        d[k] = distance(m, pairs[k].first, pairs[k].second);
      },
      ctx.cfg().jobs);
  std::size_t failures = 0;
  double worst = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < trials; ++k) {
    const double margin = 2.0 * d[k] - sup[k];
    worst = std::min(worst, margin);
    rows.push_back({d[k], sup[k]});
    if (margin < -slack) {
      ++failures;
      if (r.witnesses.size() < LemmaReport::kMaxWitnesses) {
        r.witnesses.push_back({{"check", "lipschitz"},
                               {"x", to_json(pairs[k].first)},
                               {"y", to_json(pairs[k].second)},
                               {"distance", d[k]},
                               {"sup", sup[k]},
                               {"margin", margin}});
      }
    }
  }
  r.summary = {{"trials", trials}, {"failures", failures}, {"worst_margin", worst}, {"slack", slack}};
  r.series["lipschitz"] = {{"distance", "sup_distance"}, rows};
  finish_asserted(r, failures == 0);
}

void run_holder(Context& ctx, const ExperimentSpec&, ExperimentResult& r) {
  const auto& ds = ctx.dataset();
  const auto d = ctx.oracle();
  r.fits.push_back(fit_holder_constant(ds, d));
  try {
    r.fits.push_back(fit_bilip_lower(ds, d));
  } catch (const InvalidArgument& ex) {
    r.warnings.push_back(ex.what());
  }
  std::vector<std::vector<double>> rows;
  for (std::size_t a = 0; a < ds.size(); ++a)
    for (std::size_t b = a + 1; b < ds.size(); ++b) {
      rows.push_back({sup_distance(ds.matrices[a], ds.matrices[b]), d(ds.sources[a], ds.sources[b])});
    }
  r.series["holder"] = {{"sup_distance", "distance"}, rows};
  r.summary = {{"sources", ds.size()}, {"fill_distance", ds.sample.fill_distance}, {"tolerance", ds.tolerance}};
}

void run_invertibility(Context& ctx, const ExperimentSpec&, ExperimentResult& r) {
  const auto& ds = ctx.dataset();
  std::size_t zero_pairs = 0, misses = 0;
  double min_sup = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < ds.size(); ++a) {
    for (std::size_t b = a + 1; b < ds.size(); ++b) {
      if (ds.sources[a] == ds.sources[b]) continue;
      const double s = sup_distance(ds.matrices[a], ds.matrices[b]);
      min_sup = std::min(min_sup, s);
      if (!(s > 0.0)) {
        ++zero_pairs;
        if (r.witnesses.size() < LemmaReport::kMaxWitnesses) {
          r.witnesses.push_back({{"check", "injective"}, {"x", to_json(ds.sources[a])}, {"y", to_json(ds.sources[b])}});
        }
      }
    }
    const auto inv = invert(ds, ds.matrices[a]);
    if (!inv.point || *inv.point != ds.sources[a]) {
      ++misses;
      if (r.witnesses.size() < LemmaReport::kMaxWitnesses) {
        r.witnesses.push_back({{"check", "invert"}, {"x", to_json(ds.sources[a])}, {"index", a}});
      }
    }
  }
  r.summary = {{"sources", ds.size()},
               {"zero_sup_pairs", zero_pairs},
               {"inversion_misses", misses},
               {"min_sup", std::isfinite(min_sup) ? json(min_sup) : json(nullptr)}};
  finish_asserted(r, zero_pairs == 0 && misses == 0);
}

void run_reconstruct(Context& ctx, const ExperimentSpec& e, ExperimentResult& r) {
  const auto& m = ctx.manifold();
  const auto& f = ctx.sample();
  const DdrDataset blind = ctx.dataset().blind();
  ReconstructOptions o;
  o.neighbors = count(e.params, "neighbors", o.neighbors);
  o.bandwidth_factor = num(e.params, "bandwidth", o.bandwidth_factor);
  const std::size_t q0 = count(e.params, "q0", 0);
  const double max_radius = num(e.params, "max_radius", 0.6) * ctx.cfg().f_radius;
  std::vector<std::vector<double>> rows;
  double worst = 0.0, mean = 0.0;
  std::size_t underdetermined = 0;
  for (std::size_t y = 0; y < f.size(); ++y) {
    if (y == q0 || distance(m, f.points[y], f.center) > max_radius) continue;
    try {
      const auto est = reconstruct_metric_on_F(blind, y, q0, o);
      const Mat2 truth = chart_metric(m, f.points[y]);
      const double err = (est.tensor - truth).norm() / truth.norm();
      worst = std::max(worst, err);
      mean += err;
      rows.push_back({f.points[y].x(), f.points[y].y(), est.tensor(0, 0), est.tensor(0, 1), est.tensor(1, 1),
                      truth(0, 0), truth(0, 1), truth(1, 1), err});
    } catch (const Underdetermined& ex) {
      ++underdetermined;
      if (r.witnesses.size() < LemmaReport::kMaxWitnesses) {
        r.witnesses.push_back({{"check", "underdetermined"}, {"y", to_json(f.points[y])}, {"message", ex.what()}});
      }
    }
  }
  if (underdetermined) r.warnings.push_back(std::to_string(underdetermined) + " F points underdetermined");
  if (rows.empty()) throw InvalidArgument("reconstruct: no F point within max_radius could be estimated");
  r.summary = {{"points", rows.size()},
               {"underdetermined", underdetermined},
               {"max_rel_error", worst},
               {"mean_rel_error", mean / static_cast<double>(rows.size())}};
  r.series["tensor"] = {{"x", "y", "g11", "g12", "g22", "true_g11", "true_g12", "true_g22", "rel_error"}, rows};
}

void run_angle(Context& ctx, const ExperimentSpec& e, ExperimentResult& r) {
  const auto& m = ctx.manifold();
  const std::size_t cases = count(e.params, "cases", 20);
  const double t0 = num(e.params, "t0", 0.05 * (m.analytic() ? m.scale() : 1.0));
  const double len = num(e.params, "length", m.kind() == ManifoldKind::round_sphere ? 2.0 * m.scale() : 3.0 * m.scale());
  Rng rng(r.seed);
  std::vector<std::vector<double>> rows;
  double worst = 0.0;
  for (std::size_t k = 0; k < cases; ++k) {
    const Point x = ctx.region_point(rng);
    const double a1 = rng.uniform(0.0, 2.0 * pi), alpha = rng.uniform(0.1, pi - 0.1);
    const auto u1 = m.unit_direction(x, a1), u2 = m.unit_direction(x, a1 + alpha);
    const auto f = make_observation_sample({exp_map(m, {x, len * u1.components}), exp_map(m, {x, len * u2.components})});
    const auto rec = recover_angle(m, f, {x, u2, 0, 1}, t0);
    worst = std::max(worst, std::abs(rec.angle - alpha));
    rows.push_back({alpha, rec.angle});
  }
  std::sort(rows.begin(), rows.end());
  r.summary = {{"cases", cases}, {"max_error", worst}, {"t0", t0}, {"length", len}};
  r.series["angles"] = {{"true_angle", "recovered_angle"}, rows};
}

void run_gauge(Context& ctx, const ExperimentSpec& e, ExperimentResult& r) {
  const auto& m = ctx.manifold();
  const double a = num(e.params, "rotation", 0.5);
  const auto tr = numbers(e.params, "translation", {0.9, 0.3});
  if (tr.size() != 2) throw InvalidArgument("'translation' must be [x, y]");
  const Eigen::Rotation2Dd rot(a);
  const Vec2 shift(tr[0], tr[1]);
  auto move = [&](const Point& p) -> Point { return rot * p + shift; };

  std::optional<Manifold> moved;
  if (m.kind() == ManifoldKind::euclidean_plane) {
    moved = m;
  } else if (m.kind() == ManifoldKind::grid &&
             (ctx.cfg().manifold.metric.type == "identity" || ctx.cfg().manifold.metric.type == "constant")) {
    const Rect d = m.grid().domain();
    Rect box{move(d.lo), move(d.lo)};
    for (const Point& c : {d.lo, Point(d.hi.x(), d.lo.y()), d.hi, Point(d.lo.x(), d.hi.y())}) {
      box.lo = box.lo.cwiseMin(move(c));
      box.hi = box.hi.cwiseMax(move(c));
    }
    const Mat2 g = m.grid().tensor(0, 0);
    const Mat2 rm = rot.toRotationMatrix();
    const Mat2 g2 = rm * g * rm.transpose();
    moved = make_grid_manifold(box, [g2](const Point&) { return g2; }, m.grid().spacing());
  } else {
    throw WrongManifoldKind("gauge: needs a euclidean-plane or a constant-metric grid");
  }

  const auto& ds1 = ctx.dataset();
  std::vector<Point> fp, xs;
  for (const auto& p : ds1.sample.points) fp.push_back(move(p));
  for (const auto& p : ds1.sources) xs.push_back(move(p));
  auto f2 = make_observation_sample(fp, move(ds1.sample.center), ds1.sample.radius);
  f2.fill_distance = ds1.sample.fill_distance;
  const auto ds2 = ddr_dataset(*moved, f2, xs, ctx.cfg().jobs);
  const Manifold m2 = *moved;
  const DistanceOracle d2 = [m2](const Point& p, const Point& q) { return distance(m2, p, q); };

  const auto same = gauge_isometry_test(ds1, ds1, ctx.oracle(), ctx.oracle(), ctx.cfg().jobs);
  bool identity = same.distortion == 0.0;
  for (const auto& [i, j] : same.matches) identity = identity && i == j;
  const auto rep = gauge_isometry_test(ds1, ds2, ctx.oracle(), d2, ctx.cfg().jobs);
  const double eps = std::max(ds1.tolerance, ds2.tolerance);
  const double bound = 3.0 * (eps + ds1.sample.fill_distance);
  if (rep.distortion > bound) r.warnings.push_back("moved-chart distortion exceeds 3 (eps + fill)");
  if (std::abs(rep.lambda - 1.0) > 0.05) r.warnings.push_back("|lambda - 1| > 0.05");
  r.summary = {{"self", same.to_json()}, {"moved", rep.to_json()}, {"bound", bound}, {"self_identity", identity}};
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < rep.matches.size(); ++k) {
    rows.push_back({static_cast<double>(rep.matches[k].first), static_cast<double>(rep.matches[k].second),
                    rep.match_gaps[k]});
  }
  r.series["matches"] = {{"source", "image", "sup_gap"}, rows};
  finish_asserted(r, identity);
}

void run_stability(Context& ctx, const ExperimentSpec& e, ExperimentResult& r) {
  auto levels = numbers(e.params, "levels", {1e-3, 3e-3, 1e-2, 3e-2, 1e-1});
  const auto& ds = ctx.dataset();
  const auto curve = stability_sweep(ds, ctx.oracle(), levels, r.seed, ctx.cfg().jobs);
  for (std::size_t k = 1; k < curve.distortion.size(); ++k) {
    if (curve.distortion[k] < 0.9 * curve.distortion[k - 1]) {
      r.warnings.push_back("distortion decreases beyond 10% jitter at delta = " + std::to_string(curve.levels[k]));
    }
  }
  if (curve.floor > 5.0 * ds.tolerance) r.warnings.push_back("clean floor exceeds 5 eps_h");
  r.summary = curve.to_json();
  r.summary["tolerance"] = ds.tolerance;
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < curve.levels.size(); ++k) rows.push_back({curve.levels[k], curve.distortion[k]});
  std::sort(rows.begin(), rows.end());
  r.series["stability"] = {{"delta", "distortion"}, rows};
}

void run_collar(Context& ctx, const ExperimentSpec& e, ExperimentResult& r) {
  const auto& core = ctx.manifold();
  if (core.analytic()) throw WrongManifoldKind("collar: needs a grid manifold");
  const Rect d = core.grid().domain();
  const double depth = num(e.params, "depth", 0.5 * std::min(d.width(), d.height()));
  std::vector<CollarRule> rules;
  if (e.params.contains("rules")) {
    for (const auto& s : e.params["rules"]) rules.push_back(parse_collar_rule(s.get<std::string>()));
  } else {
    rules = {CollarRule::constant_normal, CollarRule::linear_blend};
  }
  const std::size_t pairs = count(e.params, "pairs", 50);
  const std::size_t collar_points = count(e.params, "collar_points", 256);
  const std::size_t stations = count(e.params, "stations", 0);
  const auto st = sample_boundary(core, stations, r.seed);
  std::size_t failures = 0;
  double worst = std::numeric_limits<double>::infinity();
  bool bitwise = true;
  std::vector<std::vector<double>> rows;
  json per_rule = json::array();
  for (std::size_t ri = 0; ri < rules.size(); ++ri) {
    const auto cm = attach_collar(core, depth, rules[ri]);
    const auto& g = core.grid();
    const auto& eg = cm.extended().grid();
    const std::size_t pad = cm.collar_nodes();
    for (std::size_t j = 0; j < g.ny(); ++j)
      for (std::size_t i = 0; i < g.nx(); ++i) bitwise = bitwise && eg.tensor(i + pad, j + pad) == g.tensor(i, j);
    const auto fs = sample_collar(cm, collar_points, r.seed + 1);
    Rng rng(r.seed + 2);
    const Point lo = d.lo + 0.05 * Point(d.width(), d.height()), hi = d.hi - 0.05 * Point(d.width(), d.height());
    std::vector<std::pair<Point, Point>> xy(pairs);
    for (auto& [x, y] : xy) {
      x = {rng.uniform(lo.x(), hi.x()), rng.uniform(lo.y(), hi.y())};
      y = {rng.uniform(lo.x(), hi.x()), rng.uniform(lo.y(), hi.y())};
    }
    std::vector<HingeRecord> recs(pairs);
    parallel_for(pairs, [&](std::size_t k) { recs[k] = collar_monotonicity_check(cm, st, fs, xy[k].first, xy[k].second); },
                 ctx.cfg().jobs);
    for (const auto& rec : recs) {
      worst = std::min(worst, rec.margin + rec.tolerance);
      rows.push_back({static_cast<double>(ri), rec.lengths.at("core_sup"), rec.lengths.at("collar_sup"), rec.margin});
      if (!rec.holds()) {
        ++failures;
        if (r.witnesses.size() < LemmaReport::kMaxWitnesses) r.witnesses.push_back(rec.to_json());
      }
    }
    per_rule.push_back({{"rule", to_string(rules[ri])},
                        {"seam_jump", cm.seam_jump()},
                        {"interior_jump", cm.interior_jump()},
                        {"tolerance", recs.empty() ? 0.0 : recs.front().tolerance}});
  }
  r.summary = {{"pairs", pairs},         {"failures", failures}, {"core_bitwise", bitwise},
               {"depth", depth},         {"rules", per_rule},
               {"worst_slack", std::isfinite(worst) ? json(worst) : json(nullptr)}};
  r.series["collar"] = {{"rule", "core_sup", "collar_sup", "margin"}, rows};
  finish_asserted(r, failures == 0 && bitwise);
}

void run_calibration(Context&, const ExperimentSpec& e, ExperimentResult& r) {
  const auto res = numbers(e.params, "resolutions", {64, 128, 256});
  std::vector<std::vector<double>> rows;
  bool ok = true;
  double prev = 0.0;
  json ratios = json::array();
  for (double n : res) {
    const double h = 1.0 / n;
    const auto m = make_grid_manifold(Rect{{0, 0}, {1, 1}}, [](const Point&) { return Mat2(Mat2::Identity()); }, h);
    const auto f = solve_distance_field(m, {0.5, 0.5});
    double err = 0.0;
    const auto& g = m.grid();
    for (std::size_t k = 0; k < g.size(); ++k) err = std::max(err, std::abs(f.values()[k] - (g.node(k) - Point(0.5, 0.5)).norm()));
    rows.push_back({h, err, f.residual()});
    ok = ok && err <= 2.0 * h;
    if (prev > 0.0) {
      ratios.push_back(err / prev);
      ok = ok && err / prev >= 0.4 && err / prev <= 0.7;
    }
    prev = err;
  }
  std::sort(rows.begin(), rows.end());
  r.summary = {{"halving_ratios", ratios}};
  r.series["calibration"] = {{"h", "max_error", "residual"}, rows};
  finish_asserted(r, ok);
}

void dispatch(Context& ctx, const ExperimentSpec& e, ExperimentResult& r) {
  const auto& sweeps = comparison_sweep_ids();
  if (std::find(sweeps.begin(), sweeps.end(), e.id) != sweeps.end()) return run_sweep(ctx, e, r);
  if (e.id == "lipschitz") return run_lipschitz(ctx, e, r);
  if (e.id == "holder") return run_holder(ctx, e, r);
  if (e.id == "invertibility") return run_invertibility(ctx, e, r);
  if (e.id == "reconstruct") return run_reconstruct(ctx, e, r);
  if (e.id == "angle") return run_angle(ctx, e, r);
  if (e.id == "gauge") return run_gauge(ctx, e, r);
  if (e.id == "stability") return run_stability(ctx, e, r);
  if (e.id == "collar") return run_collar(ctx, e, r);
  if (e.id == "eikonal-calibration") return run_calibration(ctx, e, r);
  throw InvalidArgument("unknown experiment id '" + e.id + "'");
}

bool randomized(const std::string& id) {
  const auto& sweeps = comparison_sweep_ids();
  return std::find(sweeps.begin(), sweeps.end(), id) != sweeps.end() || id == "lipschitz" || id == "angle" ||
         id == "stability" || id == "collar";
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& cfg, const RunOptions& options) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  if (cfg.jobs) set_default_jobs(cfg.jobs);
  Context ctx(cfg);
  RunReport report;
  report.name = cfg.name;
  report.config_hash = cfg.hash;
  report.seed = cfg.seed.value_or(0);
  report.strict = options.strict;

  for (std::size_t k = 0; k < cfg.experiments.size(); ++k) {
    const auto& e = cfg.experiments[k];
    if (options.filter && !options.filter(e.id)) continue;
    ExperimentResult r;
    r.id = e.id;
    r.index = k;
    const std::string tag = "experiment/" + std::to_string(k) + "/" + e.id;
    if (randomized(e.id)) r.seed = cfg.component_seed(tag, e.seed);
    const auto t0 = clock::now();
    try {
      dispatch(ctx, e, r);
    } catch (const std::exception& ex) {
      throw Error("experiment " + std::to_string(k) + " ('" + e.id + "', config line " + std::to_string(e.line) +
                  "): " + ex.what());
    }
    r.wall_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    if (options.strict && !r.warnings.empty()) r.status = Status::fail;
    // every failure carries what is needed to replay it
    for (auto& w : r.witnesses) {
      w["replay"] = {{"config_hash", cfg.hash}, {"experiment", k}, {"seed", r.seed}};
    }
    report.experiments.push_back(std::move(r));
  }
  report.wall_seconds = std::chrono::duration<double>(clock::now() - start).count();

  const auto dir = options.out ? *options.out : cfg.output.value_or(std::filesystem::path("ddrlab-out") / cfg.name);
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "summary.json");
    out << report.to_json(true).dump(2) << '\n';
  }
  {
    std::ofstream out(dir / "records.jsonl");
    for (const auto& r : report.experiments) {
      json line = r.to_json(false);
      line.erase("witnesses");
      out << line.dump() << '\n';
      for (const auto& w : r.witnesses) out << json{{"experiment", r.index}, {"id", r.id}, {"witness", w}}.dump() << '\n';
    }
  }
  for (const auto& r : report.experiments) {
    for (const auto& [kind, s] : r.series) {
      if (s.second.empty()) continue;
      emit_plot_data(r, kind, dir / (std::to_string(r.index) + "_" + r.id + "_" + kind + ".csv"));
    }
  }
  return report;
}

}  // namespace ddrlab::cli
