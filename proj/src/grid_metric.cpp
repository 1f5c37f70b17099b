#include "ddrlab/grid_metric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "ddrlab/errors.hpp"

namespace ddrlab {

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t seed) {
  auto h = seed;
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t k = 0; k < bytes; ++k) {
    h ^= p[k];
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

struct CubicWeights {
  std::array<double, 4> w;
  std::array<double, 4> dw;
};

// Catmull-Rom weights for samples at offsets -1, 0, 1, 2.
CubicWeights catmull_rom(double t) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  CubicWeights c;
  c.w = {0.5 * (-t + 2.0 * t2 - t3), 0.5 * (2.0 - 5.0 * t2 + 3.0 * t3),
         0.5 * (t + 4.0 * t2 - 3.0 * t3), 0.5 * (-t2 + t3)};
  c.dw = {0.5 * (-1.0 + 4.0 * t - 3.0 * t2), 0.5 * (-10.0 * t + 9.0 * t2),
          0.5 * (1.0 + 8.0 * t - 9.0 * t2), 0.5 * (-2.0 * t + 3.0 * t2)};
  return c;
}

struct CellCoord {
  long i;
  double t;
};

CellCoord locate(double u, std::size_t n) {
  const long last = static_cast<long>(n) - 2;
  long i = static_cast<long>(std::floor(u));
  i = std::clamp(i, 0L, last);
  return {i, u - static_cast<double>(i)};
}

}  // namespace

GridMetric::GridMetric(Point origin, double h, std::size_t nx, std::size_t ny,
                       std::vector<Mat2> tensors)
    : origin_(std::move(origin)), h_(h), nx_(nx), ny_(ny), tensors_(std::move(tensors)) {
  if (!(h_ > 0.0)) throw InvalidArgument("grid spacing must be positive");
  if (nx_ < 2 || ny_ < 2) throw InvalidArgument("grid needs at least 2x2 nodes");
  if (tensors_.size() != nx_ * ny_) throw InvalidArgument("tensor count does not match grid size");

  lambda_min_ = std::numeric_limits<double>::infinity();
  lambda_max_ = 0.0;
  conformal_ = true;
  for (std::size_t j = 0; j < ny_; ++j) {
    for (std::size_t i = 0; i < nx_; ++i) {
      const Mat2& g = tensors_[index(i, j)];
      const double asym = std::abs(g(0, 1) - g(1, 0));
      const double scale = std::max({std::abs(g(0, 0)), std::abs(g(1, 1)), 1e-300});
      if (!g.allFinite() || asym > 1e-12 * scale) {
        std::ostringstream os;
        os << "metric tensor not symmetric at node (" << i << ", " << j << ")";
        throw NotSpd(i, j, os.str());
      }
      Eigen::SelfAdjointEigenSolver<Mat2> es(g, Eigen::EigenvaluesOnly);
      const double lo = es.eigenvalues()(0);
      const double hi = es.eigenvalues()(1);
      if (!(lo > 0.0)) {
        std::ostringstream os;
        os << "metric tensor not positive definite at node (" << i << ", " << j
           << "), smallest eigenvalue " << lo;
        throw NotSpd(i, j, os.str());
      }
      lambda_min_ = std::min(lambda_min_, lo);
      lambda_max_ = std::max(lambda_max_, hi);
      if (std::abs(g(0, 1)) > 1e-12 * scale || std::abs(g(0, 0) - g(1, 1)) > 1e-12 * scale) {
        conformal_ = false;
      }
    }
  }

  std::uint64_t hv = fnv1a(origin_.data(), sizeof(double) * 2);
  hv = fnv1a(&h_, sizeof(double), hv);
  const std::uint64_t dims[2] = {nx_, ny_};
  hv = fnv1a(dims, sizeof(dims), hv);
  hv = fnv1a(tensors_.data(), sizeof(Mat2) * tensors_.size(), hv);
  hash_ = hv;

  compute_curvature();
}

GridMetric GridMetric::sample(const Rect& domain, const std::function<Mat2(const Point&)>& fn,
                              double h) {
  if (!(h > 0.0)) throw InvalidArgument("grid spacing must be positive");
  const auto count = [h](double extent) {
    return static_cast<std::size_t>(std::floor(extent / h + 1e-9)) + 1;
  };
  if (!(domain.width() > 0.0) || !(domain.height() > 0.0)) {
    throw InvalidArgument("grid domain must have positive extent");
  }
  const std::size_t nx = count(domain.width());
  const std::size_t ny = count(domain.height());
  if (nx < 2 || ny < 2) throw InvalidArgument("grid domain too small: fewer than 2x2 nodes");
  std::vector<Mat2> tensors(nx * ny);
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      tensors[j * nx + i] =
          fn(domain.lo + h * Point(static_cast<double>(i), static_cast<double>(j)));
    }
  }
  return GridMetric(domain.lo, h, nx, ny, std::move(tensors));
}

Rect GridMetric::domain() const {
  return Rect{origin_, origin_ + h_ * Point(static_cast<double>(nx_ - 1),
                                            static_cast<double>(ny_ - 1))};
}

std::size_t GridMetric::nearest_node(const Point& p) const {
  const Point u = (p - origin_) / h_;
  const long i = std::clamp(std::lround(u.x()), 0L, static_cast<long>(nx_) - 1);
  const long j = std::clamp(std::lround(u.y()), 0L, static_cast<long>(ny_) - 1);
  return index(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
}

// Node tensor with linear extrapolation to one ghost layer on each side.
Mat2 GridMetric::extended(long i, long j) const {
  const long nx = static_cast<long>(nx_);
  const long ny = static_cast<long>(ny_);
  if (i < 0) return 2.0 * extended(0, j) - extended(1, j);
  if (i >= nx) return 2.0 * extended(nx - 1, j) - extended(nx - 2, j);
  if (j < 0) return 2.0 * extended(i, 0) - extended(i, 1);
  if (j >= ny) return 2.0 * extended(i, ny - 1) - extended(i, ny - 2);
  return tensors_[static_cast<std::size_t>(j) * nx_ + static_cast<std::size_t>(i)];
}

MetricJet GridMetric::jet_at(const Point& p) const {
  const Point u = (p - origin_) / h_;
  const auto cx = locate(u.x(), nx_);
  const auto cy = locate(u.y(), ny_);
  const auto wx = catmull_rom(cx.t);
  const auto wy = catmull_rom(cy.t);
  MetricJet jet{Mat2::Zero(), Mat2::Zero(), Mat2::Zero()};
  for (int b = 0; b < 4; ++b) {
    for (int a = 0; a < 4; ++a) {
      const Mat2 f = extended(cx.i + a - 1, cy.i + b - 1);
      jet.g += (wx.w[a] * wy.w[b]) * f;
      jet.dx += (wx.dw[a] * wy.w[b]) * f;
      jet.dy += (wx.w[a] * wy.dw[b]) * f;
    }
  }
  jet.dx /= h_;
  jet.dy /= h_;
  return jet;
}

Mat2 GridMetric::metric_at(const Point& p) const { return jet_at(p).g; }

Mat2 GridMetric::bilinear_at(const Point& p) const {
  const Point u = (p - origin_) / h_;
  const auto cx = locate(u.x(), nx_);
  const auto cy = locate(u.y(), ny_);
  const auto i = static_cast<std::size_t>(cx.i);
  const auto j = static_cast<std::size_t>(cy.i);
  return (1.0 - cx.t) * (1.0 - cy.t) * tensor(i, j) + cx.t * (1.0 - cy.t) * tensor(i + 1, j) +
         (1.0 - cx.t) * cy.t * tensor(i, j + 1) + cx.t * cy.t * tensor(i + 1, j + 1);
}

Christoffel GridMetric::christoffel_at(const Point& p) const {
  const MetricJet jet = jet_at(p);
  const Mat2 ginv = jet.g.inverse();
  const Mat2* d[2] = {&jet.dx, &jet.dy};
  // first kind: c[l](i,j) = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
  std::array<Mat2, 2> first;
  for (int l = 0; l < 2; ++l) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        first[l](i, j) = 0.5 * ((*d[i])(j, l) + (*d[j])(i, l) - (*d[l])(i, j));
      }
    }
  }
  Christoffel gamma;
  for (int k = 0; k < 2; ++k) {
    gamma[k] = ginv(k, 0) * first[0] + ginv(k, 1) * first[1];
  }
  return gamma;
}

Vec2 geodesic_acceleration(const Christoffel& gamma, const Vec2& v) {
  return Vec2(-v.dot(gamma[0] * v), -v.dot(gamma[1] * v));
}

void GridMetric::compute_curvature() {
  curvature_.assign(size(), 0.0);
  curvature_min_ = 0.0;
  curvature_max_ = 0.0;
  if (nx_ < 3 || ny_ < 3) return;
  const double h = h_;
  auto E = [&](std::size_t i, std::size_t j) { return tensor(i, j)(0, 0); };
  auto F = [&](std::size_t i, std::size_t j) { return tensor(i, j)(0, 1); };
  auto G = [&](std::size_t i, std::size_t j) { return tensor(i, j)(1, 1); };
  curvature_min_ = std::numeric_limits<double>::infinity();
  curvature_max_ = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j + 1 < ny_; ++j) {
    for (std::size_t i = 1; i + 1 < nx_; ++i) {
      const double e = E(i, j), f = F(i, j), g = G(i, j);
      const double eu = (E(i + 1, j) - E(i - 1, j)) / (2 * h);
      const double ev = (E(i, j + 1) - E(i, j - 1)) / (2 * h);
      const double fu = (F(i + 1, j) - F(i - 1, j)) / (2 * h);
      const double fv = (F(i, j + 1) - F(i, j - 1)) / (2 * h);
      const double gu = (G(i + 1, j) - G(i - 1, j)) / (2 * h);
      const double gv = (G(i, j + 1) - G(i, j - 1)) / (2 * h);
      const double evv = (E(i, j + 1) - 2 * e + E(i, j - 1)) / (h * h);
      const double guu = (G(i + 1, j) - 2 * g + G(i - 1, j)) / (h * h);
      const double fuv =
          (F(i + 1, j + 1) - F(i + 1, j - 1) - F(i - 1, j + 1) + F(i - 1, j - 1)) / (4 * h * h);
      Eigen::Matrix3d a;
      a << -0.5 * evv + fuv - 0.5 * guu, 0.5 * eu, fu - 0.5 * ev,  //
          fv - 0.5 * gu, e, f,                                     //
          0.5 * gv, f, g;
      Eigen::Matrix3d b;
      b << 0.0, 0.5 * ev, 0.5 * gu,  //
          0.5 * ev, e, f,            //
          0.5 * gu, f, g;
      const double det = e * g - f * f;
      const double k = (a.determinant() - b.determinant()) / (det * det);
      curvature_[index(i, j)] = k;
      curvature_min_ = std::min(curvature_min_, k);
      curvature_max_ = std::max(curvature_max_, k);
    }
  }
  for (std::size_t j = 0; j < ny_; ++j) {
    for (std::size_t i = 0; i < nx_; ++i) {
      if (i >= 1 && i + 1 < nx_ && j >= 1 && j + 1 < ny_) continue;
      const std::size_t ii = std::clamp<std::size_t>(i, 1, nx_ - 2);
      const std::size_t jj = std::clamp<std::size_t>(j, 1, ny_ - 2);
      curvature_[index(i, j)] = curvature_[index(ii, jj)];
    }
  }
}

}  // namespace ddrlab
