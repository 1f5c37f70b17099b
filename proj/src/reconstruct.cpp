#include "ddrlab/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "ddrlab/eikonal.hpp"
#include "ddrlab/errors.hpp"
#include "ddrlab/parallel.hpp"
#include "ddrlab/random.hpp"

namespace ddrlab {

namespace {

// Sup-norm distance between two DDR columns on index-matched samples.
double column_sup(const DdrMatrix& a, const DdrMatrix& b) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double e = a.column()[i] - b.column()[i];
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  return a.size() ? hi - lo : 0.0;
}

std::vector<std::size_t> nearest(const ObservationSample& f, std::size_t y, std::size_t k) {
  std::vector<std::size_t> idx(f.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::erase(idx, y);
  const Point& p = f.points[y];
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      return (f.points[a] - p).squaredNorm() < (f.points[b] - p).squaredNorm();
                    });
  idx.resize(k);
  return idx;
}

// Comparison angle at a from three pairwise distances (planar law of cosines).
std::optional<double> one_minus_cos(double ab, double ac, double bc) {
  if (ab < 1e-9 || ac < 1e-9) return std::nullopt;
  const double c = std::clamp((ab * ab + ac * ac - bc * bc) / (2.0 * ab * ac), -1.0, 1.0);
  return 1.0 - c;
}

Eigen::MatrixXd pairwise(std::span<const Point> pts, const DistanceOracle& d, unsigned jobs) {
  const std::size_t n = pts.size();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  parallel_for(n, [&](std::size_t a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = d(pts[a], pts[b]);
    }
  }, jobs);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < a; ++b)
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          out(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a));
  return out;
}

}  // namespace

json MetricEstimate::to_json() const {
  return {{"base", ddrlab::to_json(base)},
          {"index", index},
          {"g11", tensor(0, 0)},
          {"g12", tensor(0, 1)},
          {"g22", tensor(1, 1)},
          {"covectors", covectors},
          {"residual", residual},
          {"direction_spread", direction_spread},
          {"floored", floored},
          {"floor", floor}};
}

Vec2 sample_gradient(const ObservationSample& f, std::span<const double> values, std::size_t y,
                     const ReconstructOptions& o) {
  if (values.size() != f.size()) throw SampleMismatch("sample_gradient: value count != sample size");
  if (y >= f.size()) throw InvalidArgument("sample_gradient: index out of range");
  const auto nb = nearest(f, y, o.neighbors);
  if (nb.size() < 5) throw Underdetermined("sample_gradient: fewer than 5 neighbors", 0.0);
  const Point& p = f.points[y];
  const double reach = (f.points[nb.back()] - p).norm();
  double bw = o.bandwidth_factor * f.fill_distance;
  if (!(bw > 0.0)) bw = reach;

  // f(q) - f(y) = g.d + 1/2 d^T H d, coordinates scaled by reach for conditioning
  Eigen::MatrixXd a(static_cast<Eigen::Index>(nb.size()), 5);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(nb.size()));
  for (std::size_t r = 0; r < nb.size(); ++r) {
    const Vec2 d = (f.points[nb[r]] - p) / reach;
    const double w = std::sqrt(std::exp(-(d * reach).squaredNorm() / (bw * bw)));
    const auto i = static_cast<Eigen::Index>(r);
    a.row(i) << d.x(), d.y(), 0.5 * d.x() * d.x(), d.x() * d.y(), 0.5 * d.y() * d.y();
    a.row(i) *= w;
    rhs(i) = w * (values[nb[r]] - values[y]);
  }
  const Eigen::VectorXd sol = a.colPivHouseholderQr().solve(rhs);
  return Vec2(sol(0), sol(1)) / reach;
}

MetricEstimate reconstruct_metric_on_F(const DdrDataset& ds, std::size_t y, std::size_t q0,
                                       const ReconstructOptions& o) {
  const auto& f = ds.sample;
  if (y >= f.size() || q0 >= f.size()) throw InvalidArgument("reconstruct_metric_on_F: bad index");
  if (ds.size() < 3) {
    throw Underdetermined("reconstruct_metric_on_F: need at least 3 sources", 0.0);
  }
  std::vector<Vec2> w;
  std::vector<double> values(f.size());
  for (const auto& mat : ds.matrices) {
    for (std::size_t i = 0; i < f.size(); ++i) values[i] = mat(i, q0);
    w.push_back(sample_gradient(f, values, y, o));
  }

  // rows (w1^2, 2 w1 w2, w2^2) . (h11, h12, h22) = 1, h = g^{-1}
  const auto n = static_cast<Eigen::Index>(w.size());
  Eigen::MatrixXd a(n, 3), normalized(n, 3);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Vec2& v = w[static_cast<std::size_t>(r)];
    a.row(r) << v.x() * v.x(), 2.0 * v.x() * v.y(), v.y() * v.y();
    normalized.row(r) = a.row(r) / std::max(v.squaredNorm(), 1e-300);
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(normalized);
  const auto sv = svd.singularValues();
  const double spread = sv(0) > 0.0 ? sv(sv.size() - 1) / sv(0) : 0.0;
  if (spread < o.min_spread) {
    throw Underdetermined("reconstruct_metric_on_F: covector directions are nearly parallel", spread);
  }
  const Eigen::Vector3d h = a.colPivHouseholderQr().solve(Eigen::VectorXd::Ones(n));
  Mat2 hinv;
  hinv << h(0), h(1), h(1), h(2);

  MetricEstimate est;
  est.base = f.points[y];
  est.index = y;
  est.covectors = w.size();
  est.direction_spread = spread;

  Eigen::SelfAdjointEigenSolver<Mat2> eig(hinv);
  Eigen::Vector2d ev = eig.eigenvalues();
  if (!(ev(0) > 0.0)) {
    if (!(ev(1) > 0.0)) {
      throw Underdetermined("reconstruct_metric_on_F: fitted inverse metric has no positive eigenvalue",
                            spread);
    }
    est.floored = true;
    est.floor = 0.5 * ev(1);
    ev(0) = est.floor;
    hinv = eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
  }
  est.tensor = hinv.inverse();
  est.tensor = 0.5 * (est.tensor + est.tensor.transpose());
  for (const auto& v : w) est.residual = std::max(est.residual, std::abs(v.dot(hinv * v) - 1.0));
  return est;
}

// ---- angles and lambda -------------------------------------------------------------------

AngleRecovery recover_angle(const Manifold& m, const ObservationSample& f, const AngleProbe& probe,
                            double t0, double eps) {
  if (probe.p1 >= f.size() || probe.p2 >= f.size()) throw InvalidArgument("recover_angle: bad index");
  if (!(t0 > 0.0)) throw InvalidArgument("recover_angle: t0 must be positive");
  const TangentVector u = m.unit(probe.direction);
  const double at_x = ddr_of_point(m, f, probe.x)(probe.p1, probe.p2);
  AngleRecovery out;
  for (int k = 0; k < 3; ++k) {
    const double t = t0 / static_cast<double>(1 << k);
    const Point y = exp_map(m, {probe.x, t * u.components});
    const double q = (ddr_of_point(m, f, y)(probe.p1, probe.p2) - at_x) / t;
    if (q < -eps || q > 2.0 + eps) {
      throw InconsistentData("recover_angle: difference quotient " + std::to_string(q) +
                             " outside [-eps, 2 + eps]");
    }
    out.quotients[static_cast<std::size_t>(k)] = q;
  }
  const auto& q = out.quotients;
  out.limit = (8.0 * q[2] - 6.0 * q[1] + q[0]) / 3.0;
  out.angle = std::acos(std::clamp(1.0 - out.limit, -1.0, 1.0));
  return out;
}

LambdaEstimate estimate_lambda(const Manifold& m1, const ObservationSample& f1,
                               const Manifold& m2, const ObservationSample& f2,
                               std::span<const AngleProbe> probes1,
                               std::span<const AngleProbe> probes2, double t0, double gate_tol) {
  if (f1.size() != f2.size()) throw SampleMismatch("estimate_lambda: F samples differ in size");
  if (probes1.size() != probes2.size()) throw InvalidArgument("estimate_lambda: unmatched probes");
  LambdaEstimate out;
  const std::size_t n = std::min<std::size_t>(f1.size(), 24);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = distance(m1, f1.points[i], f1.points[j]);
      const double b = distance(m2, f2.points[i], f2.points[j]);
      out.f_mismatch = std::max(out.f_mismatch, std::abs(a - b));
    }
  if (out.f_mismatch > gate_tol) {
    throw InconsistentData("estimate_lambda: distances on F disagree by " +
                           std::to_string(out.f_mismatch));
  }
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < probes1.size(); ++k) {
    const double a = recover_angle(m1, f1, probes1[k], t0).limit;
    const double b = recover_angle(m2, f2, probes2[k], t0).limit;
    out.one_minus_cos.emplace_back(a, b);
    if (a <= 1e-6) continue;
    num += a * b;
    den += a * a;
    ++out.pairs;
  }
  if (out.pairs < 2) throw InvalidArgument("estimate_lambda: fewer than 2 recoverable direction pairs");
  out.lambda = num / den;
  out.deviation = std::abs(out.lambda - 1.0);
  return out;
}

// ---- correspondence ----------------------------------------------------------------------

json CorrespondenceReport::to_json() const {
  json j = {{"distortion", distortion},
            {"lambda", lambda},
            {"angle_defect_max", angle_defect_max},
            {"angle_defect_mean", angle_defect_mean},
            {"triangles", triangles},
            {"injective", injective},
            {"hausdorff_sup", hausdorff_sup},
            {"chains_tested", chains_tested},
            {"chain_defect", chain_defect},
            {"matches", matches.size()}};
  j["f_fixed_error"] = f_fixed_error ? json(*f_fixed_error) : json(nullptr);
  return j;
}

CorrespondenceReport gauge_isometry_test(const DdrDataset& ds1, const DdrDataset& ds2,
                                         const DistanceOracle& d1, const DistanceOracle& d2,
                                         unsigned jobs) {
  if (ds1.sample.size() != ds2.sample.size()) {
    throw SampleMismatch("gauge_isometry_test: F samples differ in size");
  }
  if (ds1.sources.size() != ds1.size() || ds2.sources.size() != ds2.size()) {
    throw InvalidArgument("gauge_isometry_test: datasets need their sources (unblinded)");
  }
  if (ds1.size() == 0 || ds2.size() == 0) throw InvalidArgument("gauge_isometry_test: empty dataset");
  const std::size_t n1 = ds1.size(), n2 = ds2.size();

  CorrespondenceReport rep;
  std::vector<double> best(n1, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> arg(n1, 0);
  std::vector<double> col_best(n2, std::numeric_limits<double>::infinity());
  std::vector<std::vector<double>> rows(n1);
  parallel_for(n1, [&](std::size_t a) {
    rows[a].resize(n2);
    for (std::size_t b = 0; b < n2; ++b) {
      const double s = column_sup(ds1.matrices[a], ds2.matrices[b]);
      rows[a][b] = s;
      if (s < best[a]) best[a] = s, arg[a] = b;
    }
  }, jobs);
  for (std::size_t a = 0; a < n1; ++a) {
    rep.matches.emplace_back(a, arg[a]);
    rep.match_gaps.push_back(best[a]);
    for (std::size_t b = 0; b < n2; ++b) col_best[b] = std::min(col_best[b], rows[a][b]);
  }
  rep.hausdorff_sup = std::max(*std::max_element(best.begin(), best.end()),
                               *std::max_element(col_best.begin(), col_best.end()));
  std::vector<std::size_t> used(arg);
  std::sort(used.begin(), used.end());
  rep.injective = std::adjacent_find(used.begin(), used.end()) == used.end();

  std::vector<Point> img(n1);
  for (std::size_t a = 0; a < n1; ++a) img[a] = ds2.sources[arg[a]];
  const Eigen::MatrixXd a1 = pairwise(ds1.sources, d1, jobs);
  const Eigen::MatrixXd a2 = pairwise(img, d2, jobs);
  rep.distortion = (a1 - a2).cwiseAbs().maxCoeff();

  // comparison angles on consecutive triples; skip thin triangles
  const double diam = a1.maxCoeff();
  double num = 0.0, den = 0.0, sum_defect = 0.0;
  auto at = [](const Eigen::MatrixXd& mx, std::size_t i, std::size_t j) {
    return mx(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  };
  if (n1 >= 3) {
    for (std::size_t a = 0; a < n1; ++a) {
      const std::size_t b = (a + 1) % n1, c = (a + 2) % n1;
      if (std::min(at(a1, a, b), at(a1, a, c)) < 0.1 * diam) continue;
      const auto x1 = one_minus_cos(at(a1, a, b), at(a1, a, c), at(a1, b, c));
      const auto x2 = one_minus_cos(at(a2, a, b), at(a2, a, c), at(a2, b, c));
      if (!x1 || !x2 || *x1 < 1e-3) continue;
      num += *x1 * *x2;
      den += *x1 * *x1;
      const double defect = std::abs(std::acos(1.0 - *x1) - std::acos(1.0 - *x2));
      rep.angle_defect_max = std::max(rep.angle_defect_max, defect);
      sum_defect += defect;
      ++rep.triangles;
    }
  }
  if (rep.triangles > 0) {
    rep.lambda = num / den;
    rep.angle_defect_mean = sum_defect / static_cast<double>(rep.triangles);
  }

  // sources sitting on F points: phi should fix them
  const auto& f1 = ds1.sample.points;
  const auto& f2 = ds2.sample.points;
  for (std::size_t a = 0; a < n1; ++a) {
    for (std::size_t i = 0; i < f1.size(); ++i) {
      if ((ds1.sources[a] - f1[i]).norm() > 1e-12) continue;
      const double e = d2(img[a], f2[i]);
      rep.f_fixed_error = std::max(rep.f_fixed_error.value_or(0.0), e);
      break;
    }
  }

  // chains x, y, z with |xy| + |yz| = |xz| on side 1 must stay chains after phi
  const double chain_tol = 1e-3 * diam;
  for (std::size_t a = 0; a < n1; ++a)
    for (std::size_t b = 0; b < n1; ++b) {
      if (b == a) continue;
      for (std::size_t c = a + 1; c < n1; ++c) {
        if (c == b) continue;
        const double e1 = at(a1, a, b) + at(a1, b, c) - at(a1, a, c);
        if (e1 > chain_tol) continue;
        ++rep.chains_tested;
        const double e2 = at(a2, a, b) + at(a2, b, c) - at(a2, a, c);
        rep.chain_defect = std::max(rep.chain_defect, std::abs(e2 - e1));
      }
    }
  return rep;
}

// ---- stability -----------------------------------------------------------------------------

json StabilityCurve::to_json() const {
  return {{"levels", levels}, {"distortion", distortion}, {"floor", floor}, {"slope", slope}};
}

DdrDataset perturb_dataset(const DdrDataset& clean, double delta, std::uint64_t seed) {
  DdrDataset out = clean;
  Rng rng(seed);
  std::vector<double> col;
  for (auto& mat : out.matrices) {
    col = mat.column();
    for (auto& v : col) v += delta * (rng.uniform() - 0.5);
    mat = DdrMatrix(col, mat.fingerprint(), mat.source());
  }
  return out;
}

StabilityCurve stability_sweep(const DdrDataset& clean, const DistanceOracle& d,
                               std::span<const double> levels, std::uint64_t seed, unsigned jobs) {
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (!(levels[k] > 0.0) || (k > 0 && !(levels[k] > levels[k - 1]))) {
      throw InvalidArgument("stability_sweep: levels must be positive and strictly increasing");
    }
  }
  StabilityCurve curve;
  curve.levels.assign(levels.begin(), levels.end());
  curve.floor = gauge_isometry_test(clean, clean, d, d, jobs).distortion;
  std::vector<double> lx, ly;
  for (double delta : levels) {
    const DdrDataset noisy = perturb_dataset(clean, delta, seed);
    const double dist = gauge_isometry_test(noisy, clean, d, d, jobs).distortion;
    curve.distortion.push_back(dist);
    if (dist > 0.0) {
      lx.push_back(std::log(delta));
      ly.push_back(std::log(dist));
    }
  }
  if (lx.size() >= 2) {
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(lx.size());
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(ly.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
      sxy += (lx[k] - mx) * (ly[k] - my);
      sxx += (lx[k] - mx) * (lx[k] - mx);
    }
    curve.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  return curve;
}

}  // namespace ddrlab
