#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace ddrlab {

using Point = Eigen::Vector2d;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

struct Rect {
  Point lo = Point::Zero();
  Point hi = Point::Zero();

  double width() const { return hi.x() - lo.x(); }
  double height() const { return hi.y() - lo.y(); }
  Point center() const { return 0.5 * (lo + hi); }
  bool contains(const Point& p, double tol = 0.0) const {
    return p.x() >= lo.x() - tol && p.x() <= hi.x() + tol && p.y() >= lo.y() - tol &&
           p.y() <= hi.y() + tol;
  }
};

// Metric tensor and its first coordinate derivatives at a point.
struct MetricJet {
  Mat2 g;
  Mat2 dx;
  Mat2 dy;
};

// christoffel[k](i, j) = Gamma^k_{ij}
using Christoffel = std::array<Mat2, 2>;

// Node-sampled SPD metric on an axis-aligned rectangle. Nodes are stored
// row-major with x varying fastest. Off-node values use a C^1 bicubic
// (Catmull-Rom) interpolant whose node derivatives are centered differences,
// so the Christoffel symbols used for geodesics and transport are exactly the
// Levi-Civita connection of the interpolated metric.
class GridMetric {
 public:
  GridMetric(Point origin, double h, std::size_t nx, std::size_t ny, std::vector<Mat2> tensors);

  // Samples `fn` at the nodes of `domain` with spacing h. The upper corner is
  // snapped down to the last whole node.
  static GridMetric sample(const Rect& domain, const std::function<Mat2(const Point&)>& fn,
                           double h);

  const Point& origin() const { return origin_; }
  double spacing() const { return h_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t size() const { return nx_ * ny_; }
  std::size_t index(std::size_t i, std::size_t j) const { return j * nx_ + i; }
  Point node(std::size_t i, std::size_t j) const {
    return origin_ + h_ * Point(static_cast<double>(i), static_cast<double>(j));
  }
  Point node(std::size_t k) const { return node(k % nx_, k / nx_); }
  const Mat2& tensor(std::size_t i, std::size_t j) const { return tensors_[index(i, j)]; }
  std::span<const Mat2> tensors() const { return tensors_; }

  Rect domain() const;
  bool contains(const Point& p, double tol = 1e-12) const { return domain().contains(p, tol); }
  // Nearest node (clamped into the grid).
  std::size_t nearest_node(const Point& p) const;

  bool conformal() const { return conformal_; }
  double lambda_min() const { return lambda_min_; }
  double lambda_max() const { return lambda_max_; }
  std::uint64_t hash() const { return hash_; }

  Mat2 metric_at(const Point& p) const;
  Mat2 bilinear_at(const Point& p) const;
  MetricJet jet_at(const Point& p) const;
  Christoffel christoffel_at(const Point& p) const;

  // Gaussian curvature at nodes (Brioschi formula, centered differences;
  // boundary nodes copy the nearest interior node).
  double curvature(std::size_t i, std::size_t j) const { return curvature_[index(i, j)]; }
  std::span<const double> curvatures() const { return curvature_; }
  double curvature_min() const { return curvature_min_; }
  double curvature_max() const { return curvature_max_; }

 private:
  Mat2 extended(long i, long j) const;
  void compute_curvature();

  Point origin_;
  double h_;
  std::size_t nx_;
  std::size_t ny_;
  std::vector<Mat2> tensors_;
  std::vector<double> curvature_;
  bool conformal_ = false;
  double lambda_min_ = 0.0;
  double lambda_max_ = 0.0;
  double curvature_min_ = 0.0;
  double curvature_max_ = 0.0;
  std::uint64_t hash_ = 0;
};

// -Gamma^k_ij v^i v^j
Vec2 geodesic_acceleration(const Christoffel& gamma, const Vec2& v);

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t seed = 1469598103934665603ULL);

}  // namespace ddrlab
