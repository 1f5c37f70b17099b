// Acceptance harness: one PASS/FAIL line per criterion, tolerances pinned below.
//
//   acceptance [--only N]... [--expect-fail N]...
//
// Exit status is 0 iff the set of failing criteria equals the --expect-fail set.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "ddrlab/boundary.hpp"
#include "ddrlab/comparison.hpp"
#include "ddrlab/ddr.hpp"
#include "ddrlab/eikonal.hpp"
#include "ddrlab/errors.hpp"
#include "ddrlab/manifold.hpp"
#include "ddrlab/reconstruct.hpp"
#include "oracles.hpp"

using namespace ddrlab;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<Manifold> models() { return {Manifold::euclidean(1.0), Manifold::sphere(1.0), Manifold::hyperbolic(1.0)}; }

Manifold bump_grid(double h, double amplitude, double width, Point center = {0.5, 0.5}) {
  return make_grid_manifold(Rect{{0, 0}, {1, 1}}, [=](const Point& p) -> Mat2 {
    const double c = 1.0 + amplitude * std::exp(-width * (p - center).squaredNorm());
    return c * c * Mat2::Identity();
  }, h);
}

Manifold identity_grid(double h, Rect domain = Rect{{0, 0}, {1, 1}}) {
  return make_grid_manifold(domain, [](const Point&) -> Mat2 { return Mat2::Identity(); }, h);
}

DistanceOracle oracle_of(const Manifold& m) {
  return [m](const Point& a, const Point& b) { return distance(m, a, b); };
}

// Sources at pairwise distance >= sep, by rejection.
std::vector<Point> separated(const Manifold& m, std::size_t n, double sep, const std::function<Point()>& draw) {
  std::vector<Point> xs;
  while (xs.size() < n) {
    const Point p = draw();
    bool ok = true;
    for (const auto& q : xs) ok = ok && distance(m, p, q) >= sep;
    if (ok) xs.push_back(p);
  }
  return xs;
}

Point model_point(const Manifold& m, Rng& rng, double extent) {
  switch (m.kind()) {
    case ManifoldKind::round_sphere: return {rng.uniform(-pi, pi), rng.uniform(-extent, extent)};
    case ManifoldKind::hyperbolic_plane: {
      const double r = extent * std::sqrt(rng.uniform()), t = rng.uniform(0, 2 * pi);
      return {r * std::cos(t), r * std::sin(t)};
    }
    default: return {rng.uniform(-extent, extent), rng.uniform(-extent, extent)};
  }
}

// ---- 1 --------------------------------------------------------------------------------------

Outcome forward_lipschitz() {
  std::size_t violations = 0, configs = 0;
  double worst = -1e300;
  for (const auto& m : models()) {
    Rng rng(101);
    for (int t = 0; t < 10000; ++t, ++configs) {
      const Point x = model_point(m, rng, 0.6), y = model_point(m, rng, 0.6);
      SampleSpec spec{model_point(m, rng, 0.5), rng.uniform(0.05, 0.4), 8, rng.next()};
      const auto f = sample_observation_domain(m, spec);
      const double lhs = sup_distance(ddr_of_point(m, f, x), ddr_of_point(m, f, y));
      const double rhs = 2.0 * oracle::distance(m, x, y) + 1e-9;
      worst = std::max(worst, lhs - rhs);
      violations += lhs > rhs;
    }
  }
  const auto g = bump_grid(1.0 / 64, 1.0, 8.0);
  const double eps = solver_tolerance(g.grid(), default_backend(g.grid()));
  Rng rng(102);
  const auto f = sample_observation_domain(g, {{0.5, 0.5}, 0.2, 16, 7});
  for (int t = 0; t < 500; ++t, ++configs) {
    const Point x{rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)};
    const Point y{rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)};
    const double lhs = sup_distance(ddr_of_point(g, f, x), ddr_of_point(g, f, y));
    const double rhs = 2.0 * distance(g, x, y) + 4.0 * eps;
    worst = std::max(worst, lhs - rhs);
    violations += lhs > rhs;
  }
  return {violations == 0, fmt("%zu configs, %zu violations, max(lhs - rhs) = %.3g", configs, violations, worst)};
}

// ---- 2 --------------------------------------------------------------------------------------

bool exact_structure(const DdrMatrix& d) {
  const std::size_t n = d.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (d(i, i) != 0.0) return false;
    for (std::size_t j = 0; j < n; ++j) {
      if (d(i, j) != -d(j, i)) return false;
      for (std::size_t k = 0; k < n; ++k) {
        if (d(i, j) + d(j, k) != d(i, k)) return false;
      }
    }
  }
  return true;
}

Outcome exact_matrix_structure() {
  std::size_t checked = 0, broken = 0;
  for (const auto& m : models()) {
    Rng rng(201);
    for (int t = 0; t < 300; ++t, ++checked) {
      const auto f = sample_observation_domain(m, {model_point(m, rng, 0.5), rng.uniform(0.05, 0.5), 16, rng.next()});
      broken += !exact_structure(ddr_of_point(m, f, model_point(m, rng, 0.6)));
    }
  }
  const auto g = bump_grid(1.0 / 32, 1.0, 8.0);
  const auto f = sample_observation_domain(g, {{0.5, 0.5}, 0.3, 16, 3});
  Rng rng(202);
  for (int t = 0; t < 100; ++t, ++checked) {
    broken += !exact_structure(ddr_of_point(g, f, {rng.uniform(0, 1), rng.uniform(0, 1)}));
  }
  return {broken == 0 && checked >= 1000, fmt("%zu matrices, %zu with a broken identity", checked, broken)};
}

// ---- 3 --------------------------------------------------------------------------------------

Outcome invertibility() {
  std::size_t zero = 0, misses = 0;
  double min_sup = 1e300;
  for (const auto& m : models()) {
    Rng rng(301);
    const auto f = sample_observation_domain(m, {Point::Zero(), 0.3, 64, 31});
    const auto xs = separated(m, 200, 1e-2, [&] { return model_point(m, rng, 0.6); });
    const auto ds = ddr_dataset(m, f, xs);
    for (std::size_t a = 0; a < ds.size(); ++a) {
      for (std::size_t b = a + 1; b < ds.size(); ++b) {
        const double s = sup_distance(ds.matrices[a], ds.matrices[b]);
        min_sup = std::min(min_sup, s);
        zero += !(s > 0.0);
      }
      const auto inv = invert(ds, ds.matrices[a]);
      misses += !(inv.index == a && inv.point && *inv.point == ds.sources[a]);
    }
  }
  return {zero == 0 && misses == 0,
          fmt("3 models x 200 sources: %zu zero-sup pairs, %zu inversion misses, min sup = %.3g", zero, misses, min_sup)};
}

// ---- 4 --------------------------------------------------------------------------------------

Outcome holder_scaling() {
  bool ok = true;
  std::string detail;
  const std::vector<std::pair<Manifold, Manifold>> pairs = {
      {Manifold::euclidean(1.0), Manifold::euclidean(4.0)},
      {Manifold::sphere(1.0), Manifold::sphere(4.0)},
      {Manifold::hyperbolic(1.0), Manifold::hyperbolic(4.0)}};
  for (const auto& [m1, m4] : pairs) {
    Rng rng(401);
    const auto f1 = sample_observation_domain(m1, {Point::Zero(), 0.3, 32, 41});
    const auto f4 = make_observation_sample(f1.points, f1.center, f1.radius);
    std::vector<Point> xs;
    for (int k = 0; k < 80; ++k) xs.push_back(model_point(m1, rng, 0.6));
    const auto d1 = ddr_dataset(m1, f1, xs), d4 = ddr_dataset(m4, f4, xs);
    const auto h1 = fit_holder_constant(d1, oracle_of(m1)), h4 = fit_holder_constant(d4, oracle_of(m4));
    const auto b1 = fit_bilip_lower(d1, oracle_of(m1)), b4 = fit_bilip_lower(d4, oracle_of(m4));
    const bool finite = std::isfinite(h1.value) && h1.value > 0 && std::isfinite(b1.value) && b1.value > 0;
    const double rc = h4.value / h1.value, rb = b4.value / b1.value;
    ok = ok && finite && std::abs(rc - 2.0) <= 0.2 && std::abs(rb - 1.0) <= 0.1;
    detail += fmt("%s C0=%.4g c0=%.4g C0x=%.4f c0x=%.4f; ", to_string(m1.kind()).c_str(), h1.value, b1.value, rc, rb);
  }
  return {ok, detail};
}

// ---- 5 --------------------------------------------------------------------------------------

Outcome comparison_sweeps() {
  bool ok = true;
  std::size_t trials = 0, failures = 0;
  double worst = 1e300, hinge_eq = 1e300, shortcut_eq = 0.0;
  SweepOptions o;
  o.trials = 10000;
  o.seed = 501;
  for (const auto& m : models()) {
    for (const char* id : {"hinge", "first-variation-ineq", "short-median", "shortcut", "lipexp"}) {
      const auto rep = run_comparison_sweep(id, m, o);
      trials += rep.trials;
      failures += rep.failures;
      worst = std::min(worst, rep.worst_margin);
      ok = ok && rep.trials == o.trials && rep.worst_margin >= -1e-8;
      if (std::string(id) == "hinge" && m.kind() == ManifoldKind::hyperbolic_plane) {
        hinge_eq = rep.details["min_abs_margin"].get<double>();
      }
      if (std::string(id) == "shortcut") {
        shortcut_eq = std::max(shortcut_eq, rep.details["alpha_zero_max_abs_margin"].get<double>());
      }
    }
  }
  ok = ok && hinge_eq <= 1e-9 && shortcut_eq <= 1e-9;
  return {ok, fmt("%zu trials, %zu failures, worst margin %.3g; hyperbolic hinge min|margin| %.3g; "
                  "alpha=0 shortcut max|margin| %.3g",
                  trials, failures, worst, hinge_eq, shortcut_eq)};
}

// ---- 6 --------------------------------------------------------------------------------------

Outcome direction_measure() {
  const auto e = Manifold::euclidean(1.0);
  Rng rng(601);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Point x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const double ell = rng.uniform(0.2, 2.0), rho = rng.uniform(0.01, 0.95) * ell, th = rng.uniform(0, 2 * pi);
    const Point c = x + ell * Point(std::cos(th), std::sin(th));
    worst = std::max(worst, std::abs(direction_set_angle(e, x, c, rho) - 2.0 * std::asin(rho / ell)));
  }
  SweepOptions o;
  o.trials = 1000;
  o.seed = 602;
  std::size_t failures = 0;
  for (const auto& m : {Manifold::sphere(1.0), Manifold::hyperbolic(1.0)}) {
    failures += run_comparison_sweep("dir-measure", m, o).failures;
  }
  return {worst <= 1e-6 && failures == 0,
          fmt("planar max |angle - 2 asin(rho/l)| = %.3g; lambda_KR bound: %zu failures in 2 x 1000", worst, failures)};
}

// ---- 7 --------------------------------------------------------------------------------------

Outcome extension() {
  const auto s = Manifold::sphere(1.0);
  Rng rng(701);
  double worst = 0.0;
  int capped = 0;
  for (int t = 0; t < 50; ++t) {
    const Point q{rng.uniform(-pi, pi), rng.uniform(-0.8, 0.8)};
    const double th = rng.uniform(0, 2 * pi), qp = rng.uniform(0.1, 0.6);
    const auto u = s.unit_direction(q, th);
    const Point p = exp_map(s, {q, qp * u.components});
    const Point x = exp_map(s, {q, 0.75 * pi * u.components});
    const auto ext = extension_search(s, p, q, x, 1.0, 1.0, 2.0 * pi);
    capped += ext.capped;
    worst = std::max(worst, std::abs(ext.extension - (pi - oracle::sphere_distance(p, x))));
  }
  SweepOptions o;
  o.trials = 1000;
  o.seed = 702;
  std::size_t failures = 0;
  double min_lambda = 1e300;
  for (const auto& m : models()) {
    const auto rep = run_comparison_sweep("extension", m, o);
    failures += rep.failures;
    for (const auto& f : rep.fits) min_lambda = std::min(min_lambda, f.value);
  }
  return {worst <= 1e-6 && capped == 0 && failures == 0 && min_lambda > 0.0,
          fmt("sphere |qx|=3pi/4: max |ext - (pi - |px|)| = %.3g (%d capped); sweep: %zu failures, min lambda0 = %.4g",
              worst, capped, failures, min_lambda)};
}

// ---- 8 --------------------------------------------------------------------------------------

Outcome holonomy() {
  const auto s = Manifold::sphere(1.0);
  // octant triangle, tilted so that its vertices stay off the chart poles
  const Eigen::AngleAxisd tilt(std::acos(1.0 / std::sqrt(3.0)), Eigen::Vector3d(1, -1, 0).normalized());
  auto chart = [&](const Eigen::Vector3d& v) -> Point {
    const Eigen::Vector3d w = tilt * v;
    return {std::atan2(w.y(), w.x()), std::asin(w.z())};
  };
  const Point a = chart({1, 0, 0}), b = chart({0, 1, 0}), c = chart({0, 0, 1});
  const std::vector<Point> s0{a, c}, s1{a, b, c};
  const auto oct = holonomy_area_check(s, s0, s1, s.unit_direction(a, 0.3), 1.0);
  const double err = std::abs(std::abs(oct.rotation) - pi / 2);

  // One C for all models: the largest sweep fit. Isoperimetry gives |P1 v - P0 v| <= |K| area
  // <= |K| (L0 + L1)^2 / (4 pi), so the fit must not exceed |K| / (4 pi).
  bool ok = err <= 0.01;
  std::string detail = fmt("octant rotation %.6f (err %.2g); ", std::abs(oct.rotation), err);
  SweepOptions o;
  o.trials = 10000;
  o.seed = 801;
  double c_single = 0.0;
  std::vector<std::pair<Manifold, LemmaReport>> reps;
  for (const auto& m : models()) {
    reps.emplace_back(m, run_comparison_sweep("holonomy", m, o));
    c_single = std::max(c_single, reps.back().second.fits.at(0).value);
  }
  for (const auto& [m, rep] : reps) {
    const double k = std::max(std::abs(m.sec_min()), std::abs(m.sec_max()));
    const double cfit = rep.fits.at(0).value;
    ok = ok && rep.failures == 0 && cfit <= k / (4 * pi) + 1e-12;
    // held-out configurations, reported only
    Rng rng(802);
    double ratio = 0.0;
    for (int t = 0; t < 2000; ++t) {
      const Point p = model_point(m, rng, 0.5);
      const double th = rng.uniform(0, 2 * pi);
      const Point y = exp_map(m, {p, rng.uniform(0.05, 1.0) * m.unit_direction(p, th).components});
      const Point w = exp_map(m, {p, rng.uniform(0.05, 1.0) * m.unit_direction(p, th + rng.uniform(-1.2, 1.2)).components});
      const std::vector<Point> h0{p, y}, h1{p, w, y};
      const auto r = holonomy_area_check(m, h0, h1, m.unit_direction(p, rng.uniform(0, 2 * pi)), c_single);
      const double total = r.length0 + r.length1;
      ratio = std::max(ratio, r.difference / (total * total));
    }
    detail += fmt("%s fit %.4g <= |K|/4pi %.4g, held-out max ratio %.4g; ", to_string(m.kind()).c_str(), cfit,
                  k / (4 * pi), ratio);
  }
  detail += fmt("single C = %.4g", c_single);
  return {ok, detail};
}

// ---- 9 --------------------------------------------------------------------------------------

double reconstruction_error(const Manifold& m, const ObservationSample& f, std::span<const Point> xs,
                            const std::function<Mat2(const Point&)>& truth, std::size_t& used) {
  const auto blind = ddr_dataset(m, f, xs).blind();
  double worst = 0.0;
  used = 0;
  for (std::size_t y = 1; y < f.size(); ++y) {
    if ((f.points[y] - f.center).norm() > 0.6 * f.radius) continue;
    const auto est = reconstruct_metric_on_F(blind, y, 0);
    const Mat2 g = truth(f.points[y]);
    worst = std::max(worst, (est.tensor - g).norm() / g.norm());
    ++used;
  }
  return worst;
}

Outcome metric_reconstruction() {
  const auto e = Manifold::euclidean(1.0);
  const auto fe = sample_observation_domain(e, {Point::Zero(), 0.3, 128, 91});
  std::vector<Point> ring;
  for (int k = 0; k < 8; ++k) ring.push_back(2.0 * Point(std::cos(k * pi / 4 + 0.2), std::sin(k * pi / 4 + 0.2)));
  std::size_t ne = 0, nb = 0;
  const double err_e = reconstruction_error(e, fe, ring, [](const Point&) -> Mat2 { return Mat2::Identity(); }, ne);

  const Point bc{0.45, 0.55};
  const auto g = bump_grid(1.0 / 128, 0.5, 12.5, bc);
  const auto fb = sample_observation_domain(g, {{0.5, 0.5}, 0.15, 128, 92});
  std::vector<Point> ring_b;
  for (int k = 0; k < 8; ++k) ring_b.push_back(Point(0.5, 0.5) + 0.38 * Point(std::cos(k * pi / 4 + 0.3), std::sin(k * pi / 4 + 0.3)));
  const auto truth = [bc](const Point& p) -> Mat2 {
    const double c = 1.0 + 0.5 * std::exp(-12.5 * (p - bc).squaredNorm());
    return c * c * Mat2::Identity();
  };
  const double err_b = reconstruction_error(g, fb, ring_b, truth, nb);
  return {err_e <= 0.02 && err_b <= 0.05 && ne > 0 && nb > 0,
          fmt("identity: max rel Frobenius %.4f over %zu points; bump 1/128: %.4f over %zu points", err_e, ne, err_b, nb)};
}

// ---- 10 -------------------------------------------------------------------------------------

Outcome angle_recovery() {
  double worst = 0.0;
  for (const auto& m : {Manifold::euclidean(1.0), Manifold::sphere(1.0)}) {
    const bool sphere = m.kind() == ManifoldKind::round_sphere;
    Rng rng(1001);
    for (int k = 0; k < 20; ++k) {
      const Point x = sphere ? Point(rng.uniform(-pi, pi), rng.uniform(-0.5, 0.5))
                             : Point(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4));
      const double a1 = rng.uniform(0, 2 * pi), alpha = rng.uniform(0.1, pi - 0.1);
      const double len = sphere ? 2.0 : 3.0;
      const auto u1 = m.unit_direction(x, a1), u2 = m.unit_direction(x, a1 + alpha);
      const auto f = make_observation_sample({exp_map(m, {x, len * u1.components}), exp_map(m, {x, len * u2.components})});
      worst = std::max(worst, std::abs(recover_angle(m, f, {x, u2, 0, 1}, 0.05).angle - alpha));
    }
  }
  return {worst <= 0.02, fmt("40 hinges, max |recovered - true| = %.3g rad", worst)};
}

// ---- 11 -------------------------------------------------------------------------------------

Outcome gauge_isometry() {
  const double h = 1.0 / 128;
  const auto m1 = identity_grid(h);
  const auto f1 = sample_observation_domain(m1, {{0.5, 0.5}, 0.35, 256, 111});
  Rng rng(112);
  std::vector<Point> xs;
  for (int k = 0; k < 60; ++k) xs.push_back({rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)});
  const auto ds1 = ddr_dataset(m1, f1, xs);
  const auto d1 = oracle_of(m1);

  const auto same = gauge_isometry_test(ds1, ds1, d1, d1);
  bool identity = same.distortion == 0.0;
  for (const auto& [i, j] : same.matches) identity = identity && i == j;

  const Eigen::Rotation2Dd rot(0.5);
  const Vec2 shift(0.9, 0.3);
  auto move = [&](const Point& p) -> Point { return rot * p + shift; };
  Rect box{move(Point(0, 0)), move(Point(0, 0))};
  for (const Point& c : {Point(1, 0), Point(1, 1), Point(0, 1)}) {
    box.lo = box.lo.cwiseMin(move(c));
    box.hi = box.hi.cwiseMax(move(c));
  }
  const auto m2 = identity_grid(h, box);
  std::vector<Point> fp, xs2;
  for (const auto& p : f1.points) fp.push_back(move(p));
  for (const auto& p : xs) xs2.push_back(move(p));
  auto f2 = make_observation_sample(fp, move(f1.center), f1.radius);
  f2.fill_distance = f1.fill_distance;
  const auto ds2 = ddr_dataset(m2, f2, xs2);
  const auto moved = gauge_isometry_test(ds1, ds2, d1, oracle_of(m2));
  const double bound = 3.0 * (std::max(ds1.tolerance, ds2.tolerance) + f1.fill_distance);

  // Negative control: same chart points, metric with a 10% conformal bump.
  const auto m3 = bump_grid(h, 0.1, 8.0);
  const auto ds3 = ddr_dataset(m3, make_observation_sample(f1.points, f1.center, f1.radius), xs);
  const auto control = gauge_isometry_test(ds1, ds3, d1, oracle_of(m3));

  const bool rotated_ok = moved.distortion <= bound && std::abs(moved.lambda - 1.0) <= 0.05;
  const bool control_ok = control.distortion >= 3.0 * bound;
  return {identity && rotated_ok && control_ok,
          fmt("self: distortion %.3g, identity %s; rotated: distortion %.4f <= bound %.4f, lambda %.4f; "
              "10%% bump control: distortion %.4f = %.2f x bound (needs >= 3)",
              same.distortion, identity ? "yes" : "no", moved.distortion, bound, moved.lambda, control.distortion,
              control.distortion / bound)};
}

// ---- 12 -------------------------------------------------------------------------------------

Outcome stability() {
  const auto e = Manifold::euclidean(1.0);
  const auto f = sample_observation_domain(e, {Point::Zero(), 0.15, 64, 121});
  Rng rng(122);
  std::vector<Point> xs;
  for (int k = 0; k < 300; ++k) xs.push_back({rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)});
  const auto ds = ddr_dataset(e, f, xs);
  const std::vector<double> levels{1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
  const auto curve = stability_sweep(ds, oracle_of(e), levels, 123);
  bool monotone = true;
  for (std::size_t k = 1; k < curve.distortion.size(); ++k) {
    monotone = monotone && curve.distortion[k] >= 0.9 * curve.distortion[k - 1];
  }
  const double eps = ds.tolerance;
  std::string series;
  for (double d : curve.distortion) series += fmt("%.4g ", d);
  return {monotone && curve.floor <= 5.0 * eps,
          fmt("distortion over delta: %sfloor %.3g (5 eps_h = %.3g)", series.c_str(), curve.floor, 5.0 * eps)};
}

// ---- 13 -------------------------------------------------------------------------------------

Outcome collar() {
  const auto core = bump_grid(1.0 / 64, 1.0, 8.0);
  const auto st = sample_boundary(core, 0, 131);
  Rng rng(132);
  std::vector<std::pair<Point, Point>> xy(50);
  for (auto& [x, y] : xy) {
    x = {rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)};
    y = {rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)};
  }
  std::size_t failures = 0, checks = 0;
  bool bitwise = true;
  double worst = 1e300;
  for (const auto rule : {CollarRule::constant_normal, CollarRule::linear_blend}) {
    const auto cm = attach_collar(core, 1.5, rule);
    const auto& g = core.grid();
    const auto& eg = cm.extended().grid();
    const std::size_t pad = cm.collar_nodes();
    for (std::size_t j = 0; j < g.ny(); ++j)
      for (std::size_t i = 0; i < g.nx(); ++i) bitwise = bitwise && eg.tensor(i + pad, j + pad) == g.tensor(i, j);
    const auto fs = sample_collar(cm, 256, 133);
    for (const auto& [x, y] : xy) {
      const auto r = collar_monotonicity_check(cm, st, fs, x, y);
      ++checks;
      worst = std::min(worst, r.margin / r.tolerance * 5.0);
      failures += !r.holds();
    }
  }
  return {failures == 0 && bitwise,
          fmt("%zu checks, %zu below -5 eps_h, worst margin %.3g eps_h; core bitwise %s", checks, failures, worst,
              bitwise ? "yes" : "no")};
}

// ---- 14 -------------------------------------------------------------------------------------

Outcome eikonal_calibration() {
  std::vector<double> errs;
  std::string detail;
  bool ok = true;
  for (int n : {64, 128, 256}) {
    const double h = 1.0 / n;
    const auto m = identity_grid(h);
    const auto f = solve_distance_field(m, {0.5, 0.5});
    const auto& g = m.grid();
    double err = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      err = std::max(err, std::abs(f.values()[k] - (g.node(k) - Point(0.5, 0.5)).norm()));
    }
    ok = ok && err <= 2.0 * h;
    if (!errs.empty()) {
      const double ratio = err / errs.back();
      ok = ok && ratio >= 0.4 && ratio <= 0.7;
      detail += fmt("ratio %.3f; ", ratio);
    }
    errs.push_back(err);
    detail += fmt("h=1/%d err=%.3g (%.2f h); ", n, err, err / h);
  }
  const auto m1 = identity_grid(1.0 / 64);
  const auto m2 = make_grid_manifold(Rect{{0, 0}, {1, 1}}, [](const Point&) -> Mat2 { return 4.0 * Mat2::Identity(); }, 1.0 / 64);
  const Point src{0.3, 0.6};
  const auto a = solve_distance_field(m1, src), b = solve_distance_field(m2, src);
  double rel = 0.0;
  for (std::size_t k = 0; k < a.values().size(); ++k) {
    if (a.values()[k] > 0.0) rel = std::max(rel, std::abs(b.values()[k] - 2.0 * a.values()[k]) / (2.0 * a.values()[k]));
    else rel = std::max(rel, std::abs(b.values()[k]));
  }
  ok = ok && rel <= 1e-12;
  detail += fmt("c=2 doubling max rel error %.3g", rel);
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only, expected;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    const int n = std::atoi(argv[i + 1]);
    if (flag == "--only") only.insert(n);
    else if (flag == "--expect-fail") expected.insert(n);
    else {
      std::fprintf(stderr, "usage: acceptance [--only N]... [--expect-fail N]...\n");
      return 2;
    }
  }

  const std::vector<std::pair<const char*, Outcome (*)()>> criteria = {
      {"forward Lipschitz bound", forward_lipschitz},
      {"exact DDR matrix structure", exact_matrix_structure},
      {"invertibility", invertibility},
      {"Holder / bi-Lipschitz estimators under rescaling", holder_scaling},
      {"comparison-lemma sweeps", comparison_sweeps},
      {"direction-measure bound", direction_measure},
      {"extension bound", extension},
      {"holonomy bound", holonomy},
      {"metric reconstruction on F", metric_reconstruction},
      {"angle recovery", angle_recovery},
      {"gauge isometry", gauge_isometry},
      {"stability sweep", stability},
      {"boundary collar", collar},
      {"eikonal calibration", eikonal_calibration},
  };

  std::set<int> failed;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int n = static_cast<int>(k + 1);
    if (!only.empty() && !only.contains(n)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) failed.insert(n);
    std::printf("%-4s %2d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", n, criteria[k].first, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::set<int> expected_here;
  for (int n : expected) {
    if (only.empty() || only.contains(n)) expected_here.insert(n);
  }
  if (!expected_here.empty()) {
    std::printf("expected failures:");
    for (int n : expected_here) std::printf(" %d", n);
    std::printf("; observed failures:");
    for (int n : failed) std::printf(" %d", n);
    std::printf("\n");
  }
  return failed == expected_here ? 0 : 1;
}
