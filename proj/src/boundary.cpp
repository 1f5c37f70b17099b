#include "ddrlab/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ddrlab/eikonal.hpp"
#include "ddrlab/errors.hpp"
#include "ddrlab/grid_metric.hpp"
#include "ddrlab/parallel.hpp"
#include "ddrlab/random.hpp"

namespace ddrlab {

namespace {

void require_grid(const Manifold& m, const char* what) {
  if (m.analytic()) throw WrongManifoldKind(std::string(what) + ": core must be a grid manifold");
}

}  // namespace

std::string to_string(CollarRule rule) {
  return rule == CollarRule::constant_normal ? "constant-normal" : "linear-blend";
}

CollarRule parse_collar_rule(const std::string& name) {
  if (name == "constant-normal") return CollarRule::constant_normal;
  if (name == "linear-blend" || name == "linear-blend-to-identity") return CollarRule::linear_blend;
  throw InvalidArgument("unknown collar rule '" + name + "'");
}

bool CollaredManifold::in_core(const Point& p, double tol) const {
  return core_.grid().contains(p, tol);
}

CollaredManifold attach_collar(const Manifold& core, double depth, CollarRule rule) {
  require_grid(core, "attach_collar");
  const GridMetric& g = core.grid();
  const double h = g.spacing();
  if (!(depth >= 4.0 * h)) throw InvalidArgument("attach_collar: depth must be at least 4h");
  const auto pad = static_cast<std::size_t>(std::ceil(depth / h - 1e-9));
  const std::size_t nx = g.nx() + 2 * pad, ny = g.ny() + 2 * pad;
  const auto lp = static_cast<long>(pad);

  std::vector<Mat2> tensors(nx * ny);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const long ci = static_cast<long>(i) - lp, cj = static_cast<long>(j) - lp;
      const auto bi = static_cast<std::size_t>(std::clamp<long>(ci, 0, static_cast<long>(g.nx()) - 1));
      const auto bj = static_cast<std::size_t>(std::clamp<long>(cj, 0, static_cast<long>(g.ny()) - 1));
      const Mat2& b = g.tensor(bi, bj);
      Mat2& out = tensors[j * nx + i];
      const bool core_node = static_cast<long>(bi) == ci && static_cast<long>(bj) == cj;
      if (core_node || rule == CollarRule::constant_normal) {
        out = b;
        continue;
      }
      const double di = static_cast<double>(ci - static_cast<long>(bi));
      const double dj = static_cast<double>(cj - static_cast<long>(bj));
      const double w = std::min(1.0, h * std::hypot(di, dj) / depth);
      out = (1.0 - w) * b + w * Mat2::Identity();
    }

  const Point origin = g.origin() - static_cast<double>(pad) * h * Point(1.0, 1.0);
  auto ext = std::make_shared<const GridMetric>(origin, h, nx, ny, std::move(tensors));
  CollaredManifold cm(core, Manifold::from_grid(ext));
  cm.depth_ = depth;
  cm.pad_ = pad;
  cm.rule_ = rule;
  for (std::size_t k = 1; k <= pad; ++k) {
    cm.profile_.push_back(rule == CollarRule::constant_normal
                              ? 0.0
                              : std::min(1.0, h * static_cast<double>(k) / depth));
  }
  auto in_collar = [&](std::size_t i, std::size_t j) {
    return i < pad || j < pad || i >= pad + g.nx() || j >= pad + g.ny();
  };
  double seam = 0.0;
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      if (i + 1 < nx && (in_collar(i, j) || in_collar(i + 1, j)))
        seam = std::max(seam, (ext->tensor(i, j) - ext->tensor(i + 1, j)).norm());
      if (j + 1 < ny && (in_collar(i, j) || in_collar(i, j + 1)))
        seam = std::max(seam, (ext->tensor(i, j) - ext->tensor(i, j + 1)).norm());
    }
  cm.seam_jump_ = seam;
  double interior = 0.0;
  for (std::size_t j = 0; j < g.ny(); ++j)
    for (std::size_t i = 0; i < g.nx(); ++i) {
      if (i + 1 < g.nx()) interior = std::max(interior, (g.tensor(i, j) - g.tensor(i + 1, j)).norm());
      if (j + 1 < g.ny()) interior = std::max(interior, (g.tensor(i, j) - g.tensor(i, j + 1)).norm());
    }
  cm.interior_jump_ = interior;
  return cm;
}

// ---- samples ------------------------------------------------------------------------------

bool on_core_boundary(const Manifold& core, const Point& p, double tol) {
  const Rect d = core.grid().domain();
  if (!d.contains(p, tol)) return false;
  return std::abs(p.x() - d.lo.x()) <= tol || std::abs(p.x() - d.hi.x()) <= tol ||
         std::abs(p.y() - d.lo.y()) <= tol || std::abs(p.y() - d.hi.y()) <= tol;
}

namespace {

// Perimeter point at arc length s (counterclockwise from the lower-left corner).
Point perimeter_point(const Rect& d, double s) {
  const double w = d.width(), ht = d.height();
  s = std::fmod(s, 2.0 * (w + ht));
  if (s < 0.0) s += 2.0 * (w + ht);
  if (s < w) return {d.lo.x() + s, d.lo.y()};
  s -= w;
  if (s < ht) return {d.hi.x(), d.lo.y() + s};
  s -= ht;
  if (s < w) return {d.hi.x() - s, d.hi.y()};
  s -= w;
  return {d.lo.x(), d.hi.y() - std::min(s, ht)};
}

}  // namespace

ObservationSample sample_boundary(const Manifold& core, std::size_t count, std::uint64_t seed) {
  require_grid(core, "sample_boundary");
  const GridMetric& g = core.grid();
  const Rect d = g.domain();
  std::vector<Point> pts;
  if (count == 0) {
    for (std::size_t i = 0; i < g.nx(); ++i) pts.push_back(g.node(i, 0));
    for (std::size_t j = 1; j < g.ny(); ++j) pts.push_back(g.node(g.nx() - 1, j));
    for (std::size_t i = g.nx() - 1; i-- > 0;) pts.push_back(g.node(i, g.ny() - 1));
    for (std::size_t j = g.ny() - 1; j-- > 1;) pts.push_back(g.node(0, j));
    for (auto& p : pts) p = p.cwiseMax(d.lo).cwiseMin(d.hi);
  } else {
    Rng rng(seed);
    const double per = 2.0 * (d.width() + d.height());
    const double offset = rng.uniform() * per / static_cast<double>(count);
    for (std::size_t k = 0; k < count; ++k) {
      pts.push_back(perimeter_point(d, offset + per * static_cast<double>(k) / static_cast<double>(count)));
    }
  }
  return make_observation_sample(std::move(pts), d.center(), 0.0);
}

ObservationSample sample_collar(const CollaredManifold& cm, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw InvalidArgument("sample_collar: count must be positive");
  const Rect core = cm.core().grid().domain();
  const Rect ext = cm.extended().grid().domain();
  Rng rng(seed);
  std::vector<Point> pts;
  // a quarter of the points on the boundary itself (t = 0), the rest in the band
  const std::size_t on_edge = std::max<std::size_t>(1, count / 4);
  const double per = 2.0 * (core.width() + core.height());
  for (std::size_t k = 0; k < on_edge; ++k) {
    pts.push_back(perimeter_point(core, per * (static_cast<double>(k) + rng.uniform()) /
                                            static_cast<double>(on_edge)));
  }
  while (pts.size() < count) {
    const Point p(rng.uniform(ext.lo.x(), ext.hi.x()), rng.uniform(ext.lo.y(), ext.hi.y()));
    if (core.contains(p, 0.0) && !on_core_boundary(cm.core(), p, 0.0)) continue;
    pts.push_back(p);
  }
  return make_observation_sample(std::move(pts), core.center(), 0.0);
}

// ---- boundary data ------------------------------------------------------------------------

DdrMatrix boundary_ddr(const Manifold& core, const ObservationSample& stations, const Point& x) {
  require_grid(core, "boundary_ddr");
  if (!core.contains(x)) throw OutsideDomain("boundary_ddr: x is outside the core");
  for (const auto& p : stations.points) {
    if (!on_core_boundary(core, p)) throw InvalidArgument("boundary_ddr: station is not on the boundary");
  }
  return ddr_of_point(core, stations, x);
}

DdrDataset boundary_dataset(const Manifold& core, const ObservationSample& stations,
                            std::span<const Point> xs, unsigned jobs) {
  for (const auto& p : stations.points) {
    if (!on_core_boundary(core, p)) throw InvalidArgument("boundary_dataset: station is not on the boundary");
  }
  DdrDataset ds = ddr_dataset(core, stations, xs, jobs);
  ds.boundary = true;
  return ds;
}

HingeRecord collar_monotonicity_check(const CollaredManifold& cm, const ObservationSample& stations,
                                      const ObservationSample& collar_sample, const Point& x,
                                      const Point& y) {
  if (!cm.in_core(x) || !cm.in_core(y)) {
    throw OutsideDomain("collar_monotonicity_check: x and y must be core points");
  }
  for (const auto& p : stations.points) {
    if (!on_core_boundary(cm.core(), p)) {
      throw InvalidArgument("collar_monotonicity_check: F sample must lie on the boundary");
    }
  }
  for (const auto& p : collar_sample.points) {
    if (cm.in_core(p, 0.0) && !on_core_boundary(cm.core(), p)) {
      throw InvalidArgument("collar_monotonicity_check: extended sample point inside the core");
    }
    cm.extended().require_contains(p, "collar_monotonicity_check");
  }
  const double rhs = sup_distance(ddr_of_point(cm.core(), stations, x),
                                  ddr_of_point(cm.core(), stations, y));
  const double lhs = sup_distance(ddr_of_point(cm.extended(), collar_sample, x),
                                  ddr_of_point(cm.extended(), collar_sample, y));
  const auto& eg = cm.extended().grid();
  const auto& cg = cm.core().grid();
  const double eps = std::max(solver_tolerance(eg, default_backend(eg)),
                              solver_tolerance(cg, default_backend(cg)));
  HingeRecord r;
  r.check = "collar-monotonicity";
  r.manifold = cm.extended().id();
  r.points = {{"x", x}, {"y", y}};
  r.lengths = {{"core_sup", rhs}, {"collar_sup", lhs}, {"depth", cm.depth()}};
  r.margin = rhs - lhs;
  r.tolerance = 5.0 * eps;
  return r;
}

LemmaReport boundary_invertibility_check(const DdrDataset& ds, const DistanceOracle& oracle) {
  if (ds.size() < 2) throw InvalidArgument("boundary_invertibility_check: need at least 2 sources");
  LemmaReport rep;
  rep.id = "boundary-invertibility";
  rep.manifold = ds.manifold_id;
  std::size_t duplicates = 0;
  double min_sup = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < ds.size(); ++a)
    for (std::size_t b = a + 1; b < ds.size(); ++b) {
      const double sup = sup_distance(ds.matrices[a], ds.matrices[b]);
      ++rep.trials;
      const bool same = a < ds.sources.size() && b < ds.sources.size() &&
                        ds.sources[a] == ds.sources[b];
      if (same) {
        ++duplicates;
        continue;
      }
      min_sup = std::min(min_sup, sup);
      if (!(sup > 0.0)) {
        ++rep.failures;
        if (rep.witnesses.size() < LemmaReport::kMaxWitnesses) {
          json w = {{"check", "boundary-invertibility"}, {"a", a}, {"b", b}, {"sup", sup}};
          if (b < ds.sources.size()) {
            w["x"] = to_json(ds.sources[a]);
            w["y"] = to_json(ds.sources[b]);
          }
          rep.witnesses.push_back(std::move(w));
        }
      }
    }
  rep.worst_margin = std::isfinite(min_sup) ? min_sup : 0.0;
  rep.details = {{"duplicates", duplicates}, {"min_sup", rep.worst_margin}};
  if (ds.sources.size() == ds.size()) {
    try {
      rep.fits.push_back(fit_bilip_lower(ds, oracle));
    } catch (const InvalidArgument& e) {
      rep.details["c0"] = e.what();
    }
  }
  return rep;
}

}  // namespace ddrlab
