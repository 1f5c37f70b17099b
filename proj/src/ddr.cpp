#include "ddrlab/ddr.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "ddrlab/eikonal.hpp"
#include "ddrlab/errors.hpp"
#include "ddrlab/parallel.hpp"

namespace ddrlab {

namespace fs = std::filesystem;

namespace {

double radical_inverse(std::size_t k, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (k > 0) {
    r += f * static_cast<double>(k % base);
    k /= base;
    f *= inv;
  }
  return r;
}

double frac(double v) { return v - std::floor(v); }

// Low-discrepancy disk point: Cranley-Patterson shifted Halton pair mapped to
// polar coordinates (r = radius * sqrt(u), theta = 2 pi v) around center.
class DiskSequence {
 public:
  DiskSequence(std::uint64_t seed, unsigned base_u, unsigned base_v) : bu_(base_u), bv_(base_v) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    su_ = unif(rng);
    sv_ = unif(rng);
  }

  std::pair<double, double> polar(std::size_t k, double radius) const {
    const double u = frac(radical_inverse(k, bu_) + su_);
    const double v = frac(radical_inverse(k, bv_) + sv_);
    return {radius * std::sqrt(u), 2.0 * std::numbers::pi * v};
  }

 private:
  unsigned bu_, bv_;
  double su_ = 0.0, sv_ = 0.0;
};

Point disk_point(const Manifold& m, const Point& center, double r, double theta) {
  if (r == 0.0) return center;
  const TangentVector u = m.unit_direction(center, theta);
  return exp_map(m, {center, r * u.components});
}

double approx_distance(const Manifold& m, const Point& a, const Point& b) {
  if (m.analytic()) return exact_distance(m, a, b);
  const Vec2 d = b - a;
  const Mat2 g = m.grid().metric_at(0.5 * (a + b));
  return std::sqrt(d.dot(g * d));
}

void require_same_sample(std::uint64_t a, std::uint64_t b, std::size_t na, std::size_t nb) {
  if (a != b || na != nb) throw SampleMismatch("DDR matrices were built on different F samples");
}

std::vector<std::pair<std::size_t, std::size_t>> all_pairs(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(n * (n - 1) / 2);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) out.emplace_back(a, b);
  return out;
}

}  // namespace

std::uint64_t sample_fingerprint(std::span<const Point> points) {
  std::uint64_t h = fnv1a(nullptr, 0);
  for (const auto& p : points) h = fnv1a(p.data(), 2 * sizeof(double), h);
  return h;
}

double measure_fill_distance(const Manifold& m, std::span<const Point> points, const Point& center,
                             double radius, std::size_t probes) {
  if (points.empty()) throw InvalidArgument("fill distance of an empty sample");
  if (!(radius > 0.0)) return 0.0;
  const DiskSequence seq(0x5eed5eedULL, 5, 7);
  double worst = 0.0;
  for (std::size_t k = 0; k < probes; ++k) {
    const auto [r, th] = seq.polar(k + 1, radius);
    const Point p = disk_point(m, center, r, th);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : points) best = std::min(best, approx_distance(m, p, q));
    worst = std::max(worst, best);
  }
  return worst;
}

double hausdorff_distance(const Manifold& m, std::span<const Point> a, std::span<const Point> b) {
  auto one_sided = [&](std::span<const Point> x, std::span<const Point> y) {
    double worst = 0.0;
    for (const auto& p : x) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : y) best = std::min(best, approx_distance(m, p, q));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_sided(a, b), one_sided(b, a));
}

ObservationSample sample_observation_domain(const Manifold& m, const SampleSpec& spec) {
  if (spec.count < 1) throw InvalidArgument("observation sample needs at least one point");
  if (!(spec.radius > 0.0)) throw InvalidArgument("observation ball radius must be positive");
  m.require_contains(spec.center, "sample_observation_domain");
  if (m.kind() == ManifoldKind::round_sphere && spec.radius >= m.injectivity_radius().value()) {
    throw OutsideDomain("observation ball radius exceeds the injectivity radius of the sphere");
  }
  if (!m.analytic()) {
    // The ball must stay inside the grid: probe its rim.
    for (int k = 0; k < 64; ++k) {
      try {
        disk_point(m, spec.center, spec.radius, 2.0 * std::numbers::pi * k / 64.0);
      } catch (const OutsideDomain&) {
        throw OutsideDomain("observation ball exits the grid domain");
      }
    }
  }

  ObservationSample s;
  s.center = spec.center;
  s.radius = spec.radius;
  s.seed = spec.seed;
  s.points.push_back(spec.center);
  const DiskSequence seq(spec.seed, 2, 3);
  for (std::size_t k = 1; s.points.size() < spec.count; ++k) {
    const auto [r, th] = seq.polar(k, spec.radius);
    const Point p = disk_point(m, spec.center, r, th);
    if (std::find(s.points.begin(), s.points.end(), p) != s.points.end()) continue;
    s.points.push_back(p);
  }
  s.fingerprint = sample_fingerprint(s.points);
  s.fill_distance = measure_fill_distance(m, s.points, s.center, s.radius);
  return s;
}

ObservationSample make_observation_sample(std::vector<Point> points, Point center, double radius) {
  if (points.empty()) throw InvalidArgument("observation sample needs at least one point");
  ObservationSample s;
  s.points = std::move(points);
  s.center = center;
  s.radius = radius;
  s.fingerprint = sample_fingerprint(s.points);
  return s;
}

// ---- DdrMatrix ----------------------------------------------------------------------

double DdrMatrix::quantize(double value) {
  if (!std::isfinite(value) || std::abs(value) >= kColumnLimit) {
    throw InvalidArgument("distance column entry outside the representable range");
  }
  return std::ldexp(std::nearbyint(std::ldexp(value, -kQuantumExponent)), kQuantumExponent);
}

DdrMatrix::DdrMatrix(std::span<const double> distances, std::uint64_t fingerprint,
                     std::optional<Point> source)
    : fingerprint_(fingerprint), source_(std::move(source)) {
  column_.reserve(distances.size());
  for (double d : distances) column_.push_back(quantize(d));
}

DdrMatrix DdrMatrix::blinded() const {
  DdrMatrix out = *this;
  out.source_.reset();
  return out;
}

DdrMatrix ddr_of_point(const Manifold& m, const ObservationSample& f, const Point& x) {
  m.require_contains(x, "ddr_of_point");
  std::vector<double> column(f.size());
  if (m.analytic()) {
    for (std::size_t i = 0; i < f.size(); ++i) column[i] = exact_distance(m, x, f.points[i]);
  } else {
    const auto field = FieldCache::global().get(m, x);
    for (std::size_t i = 0; i < f.size(); ++i) column[i] = eval_distance(*field, f.points[i]);
  }
  return DdrMatrix(column, f.fingerprint, x);
}

double sup_distance(const DdrMatrix& a, const DdrMatrix& b) {
  require_same_sample(a.fingerprint(), b.fingerprint(), a.size(), b.size());
  if (a.size() == 0) return 0.0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double e = a.column()[i] - b.column()[i];
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  return hi - lo;
}

// ---- datasets -------------------------------------------------------------------------

double column_tolerance(const Manifold& m, const Point& x) {
  if (m.analytic()) return 0.0;
  return FieldCache::global().get(m, x)->tolerance();
}

DdrDataset DdrDataset::blind() const {
  DdrDataset out = *this;
  out.sources.clear();
  for (auto& mat : out.matrices) mat = mat.blinded();
  out.blinded = true;
  return out;
}

DdrDataset ddr_dataset(const Manifold& m, const ObservationSample& f, std::span<const Point> xs,
                       unsigned jobs) {
  if (xs.empty()) throw InvalidArgument("ddr_dataset: no sources");
  for (const auto& x : xs) m.require_contains(x, "ddr_dataset");
  std::vector<std::optional<DdrMatrix>> slots(xs.size());
  parallel_for(xs.size(), [&](std::size_t k) { slots[k].emplace(ddr_of_point(m, f, xs[k])); }, jobs);

  DdrDataset ds;
  ds.sample = f;
  ds.sources.assign(xs.begin(), xs.end());
  ds.manifold_id = m.id();
  ds.matrices.reserve(xs.size());
  for (auto& s : slots) ds.matrices.push_back(std::move(*s));
  if (!m.analytic()) {
    for (const auto& x : xs) ds.tolerance = std::max(ds.tolerance, column_tolerance(m, x));
  }
  return ds;
}

Inversion invert(const DdrDataset& ds, const DdrMatrix& target) {
  if (ds.matrices.empty()) throw InvalidArgument("invert: empty dataset");
  Inversion best;
  best.gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < ds.matrices.size(); ++k) {
    const double gap = sup_distance(ds.matrices[k], target);
    if (gap < best.gap) {
      best.gap = gap;
      best.index = k;
    }
  }
  if (best.index < ds.sources.size()) best.point = ds.sources[best.index];
  return best;
}

namespace {

void require_sources(const DdrDataset& ds, const char* what) {
  if (ds.size() < 2) throw InvalidArgument(std::string(what) + ": need at least 2 sources");
  if (ds.sources.size() != ds.size()) {
    throw InvalidArgument(std::string(what) + ": dataset is blinded; true sources required");
  }
}

}  // namespace

ConstantFit fit_holder_constant(const DdrDataset& ds, const DistanceOracle& oracle) {
  require_sources(ds, "fit_holder_constant");
  const auto pairs = all_pairs(ds.size());
  std::vector<double> sups(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t k) {
    sups[k] = sup_distance(ds.matrices[pairs[k].first], ds.matrices[pairs[k].second]);
  });
  std::vector<double> sorted = sups;
  const std::size_t q = sorted.size() / 4;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(q), sorted.end());
  const double delta0 = sorted[q];
  const double floor = std::max(4.0 * ds.tolerance, 1e-12);

  ConstantFit fit;
  fit.name = "C0";
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (sups[k] > delta0) continue;
    const Point& x = ds.sources[pairs[k].first];
    const Point& y = ds.sources[pairs[k].second];
    const double d = oracle(x, y);
    const double c = d / std::sqrt(sups[k] + floor);
    ++fit.samples;
    if (c > fit.value || fit.samples == 1) {
      fit.value = c;
      fit.witness = {{"x", to_json(x)}, {"y", to_json(y)}, {"distance", d}, {"sup", sups[k]}};
    }
  }
  fit.details = {{"delta0", delta0}, {"eps_floor", floor}, {"fill_distance", ds.sample.fill_distance}};
  return fit;
}

ConstantFit fit_bilip_lower(const DdrDataset& ds, const DistanceOracle& oracle) {
  require_sources(ds, "fit_bilip_lower");
  const auto pairs = all_pairs(ds.size());
  std::vector<double> dist(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t k) {
    dist[k] = oracle(ds.sources[pairs[k].first], ds.sources[pairs[k].second]);
  });
  const double diam = *std::max_element(dist.begin(), dist.end());
  const double r0 = 0.1 * diam;

  ConstantFit fit;
  fit.name = "c0";
  fit.value = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (!(dist[k] > 0.0) || dist[k] >= r0) continue;
    const double sup = sup_distance(ds.matrices[pairs[k].first], ds.matrices[pairs[k].second]);
    const double c = sup / dist[k];
    ++fit.samples;
    if (c < fit.value) {
      fit.value = c;
      fit.witness = {{"x", to_json(ds.sources[pairs[k].first])},
                     {"y", to_json(ds.sources[pairs[k].second])},
                     {"distance", dist[k]},
                     {"sup", sup}};
    }
  }
  if (fit.samples == 0) throw InvalidArgument("fit_bilip_lower: no source pair closer than r0");
  fit.details = {{"r0", r0}, {"source_diameter", diam}, {"fill_distance", ds.sample.fill_distance}};
  return fit;
}

// ---- dataset files ------------------------------------------------------------------------

void save_dataset(const DdrDataset& ds, const fs::path& dir) {
  fs::create_directories(dir);
  json pts = json::array();
  for (const auto& p : ds.sample.points) pts.push_back(to_json(p));
  json srcs = json::array();
  for (const auto& p : ds.sources) srcs.push_back(to_json(p));
  const json manifest = {
      {"format_version", 1},
      {"manifold", ds.manifold_id},
      {"tolerance", ds.tolerance},
      {"boundary", ds.boundary},
      {"blinded", ds.blinded},
      {"sample",
       {{"center", to_json(ds.sample.center)},
        {"radius", ds.sample.radius},
        {"seed", ds.sample.seed},
        {"fill_distance", ds.sample.fill_distance},
        {"points", pts}}},
      {"sources", ds.blinded ? json(nullptr) : srcs},
      {"source_count", ds.size()},
      {"columns_file", "columns.f64"}};
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
  std::ofstream os(dir / "columns.f64", std::ios::binary | std::ios::trunc);
  for (const auto& mat : ds.matrices) {
    os.write(reinterpret_cast<const char*>(mat.column().data()),
             static_cast<std::streamsize>(sizeof(double) * mat.size()));
  }
  if (!os) throw Error("failed writing " + (dir / "columns.f64").string());
}

DdrDataset load_dataset(const fs::path& dir) {
  std::ifstream ms(dir / "manifest.json");
  if (!ms) throw InvalidArgument("no manifest.json in " + dir.string());
  const json manifest = json::parse(ms);
  if (manifest.at("format_version").get<int>() != 1) {
    throw InvalidArgument("unsupported dataset format version");
  }
  DdrDataset ds;
  ds.manifold_id = manifest.at("manifold").get<std::string>();
  ds.tolerance = manifest.at("tolerance").get<double>();
  ds.boundary = manifest.at("boundary").get<bool>();
  ds.blinded = manifest.at("blinded").get<bool>();
  const json& s = manifest.at("sample");
  std::vector<Point> pts;
  for (const auto& p : s.at("points")) pts.push_back(point_from_json(p));
  ds.sample = make_observation_sample(std::move(pts), point_from_json(s.at("center")),
                                      s.at("radius").get<double>());
  ds.sample.seed = s.at("seed").get<std::uint64_t>();
  ds.sample.fill_distance = s.at("fill_distance").get<double>();
  if (!ds.blinded) {
    for (const auto& p : manifest.at("sources")) ds.sources.push_back(point_from_json(p));
  }
  const auto count = manifest.at("source_count").get<std::size_t>();
  const std::size_t m = ds.sample.size();
  std::ifstream cs(dir / "columns.f64", std::ios::binary);
  std::vector<double> column(m);
  for (std::size_t k = 0; k < count; ++k) {
    if (!cs.read(reinterpret_cast<char*>(column.data()),
                 static_cast<std::streamsize>(sizeof(double) * m))) {
      throw InvalidArgument("columns.f64 is shorter than the manifest declares");
    }
    std::optional<Point> src;
    if (!ds.blinded) src = ds.sources.at(k);
    ds.matrices.emplace_back(column, ds.sample.fingerprint, src);
  }
  return ds;
}

}  // namespace ddrlab
