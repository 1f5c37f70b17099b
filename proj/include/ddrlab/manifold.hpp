#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ddrlab/extended.hpp"
#include "ddrlab/grid_metric.hpp"

namespace ddrlab {

enum class ManifoldKind { euclidean_plane, round_sphere, hyperbolic_plane, grid };

std::string to_string(ManifoldKind kind);
ManifoldKind parse_manifold_kind(const std::string& name);

// Chart conventions:
//  - euclidean-plane: Cartesian coordinates, metric scale^2 * I.
//  - round-sphere: (longitude, latitude) in radians. Tangent components are
//    taken in the orthonormal (east, north) frame of the base point, so the
//    tensor reported by metric() is the identity. The frame is well defined
//    at the poles because the chart point carries a longitude.
//  - hyperbolic-plane: Poincare disk, metric scale^2 * 4 / (1 - |x|^2)^2 * I,
//    curvature -1 / scale^2.
//  - grid: node-sampled SPD tensor on a rectangle (see GridMetric).
struct TangentVector {
  Point base = Point::Zero();
  Vec2 components = Vec2::Zero();
};

struct GeodesicPolyline {
  std::vector<Point> vertices;
  std::vector<double> arc_length;  // cumulative, unit-speed parameter
  TangentVector initial;
  TangentVector final;
  bool truncated = false;  // trace left the grid domain before total_length

  double length() const { return arc_length.empty() ? 0.0 : arc_length.back(); }
  const Point& end() const { return vertices.back(); }
};

struct ModelParams {
  double radius = 1.0;  // round-sphere
  double scale = 1.0;   // euclidean / hyperbolic: metric multiplied by scale^2
};

// Immutable handle; copies share the grid tensor field.
class Manifold {
 public:
  static Manifold euclidean(double scale = 1.0);
  static Manifold sphere(double radius = 1.0);
  static Manifold hyperbolic(double scale = 1.0);
  static Manifold from_grid(std::shared_ptr<const GridMetric> grid);

  ManifoldKind kind() const { return kind_; }
  bool analytic() const { return kind_ != ManifoldKind::grid; }
  // Length scale: sphere radius, or the metric scale factor of the model.
  double scale() const { return scale_; }
  std::string id() const;

  const GridMetric& grid() const;
  const std::shared_ptr<const GridMetric>& grid_ptr() const { return grid_; }

  // Sectional curvature range (exact for models, node range for grids).
  double sec_min() const;
  double sec_max() const;
  ExtLength injectivity_radius() const;
  ExtLength diameter() const;

  bool contains(const Point& p) const;
  void require_contains(const Point& p, const char* what) const;

  // Tensor of the chart (sphere: identity in the orthonormal frame).
  Mat2 metric(const Point& p) const;
  double inner(const Point& base, const Vec2& a, const Vec2& b) const;
  double norm(const TangentVector& v) const;
  TangentVector unit(const TangentVector& v) const;
  // Rotation by +pi/2 in T_base M (isometry of the tangent plane).
  Vec2 rotate_quarter(const Point& base, const Vec2& v) const;
  // Unit vector making oriented angle theta with the first frame direction.
  TangentVector unit_direction(const Point& base, double theta) const;
  // Signed angle in (-pi, pi] from a to b.
  double oriented_angle(const Point& base, const Vec2& a, const Vec2& b) const;
  double unsigned_angle(const Point& base, const Vec2& a, const Vec2& b) const;

 private:
  Manifold(ManifoldKind kind, double scale, std::shared_ptr<const GridMetric> grid)
      : kind_(kind), scale_(scale), grid_(std::move(grid)) {}

  ManifoldKind kind_;
  double scale_;
  std::shared_ptr<const GridMetric> grid_;
};

Manifold make_model_manifold(ManifoldKind kind, const ModelParams& params = {});
Manifold make_grid_manifold(const Rect& domain,
                            const std::function<Mat2(const Point&)>& metric_fn, double h);

// Closed-form geodesic distance; analytic kinds only.
double exact_distance(const Manifold& m, const Point& x, const Point& y);

// Closed form for analytic kinds; grids integrate the geodesic equation.
Point exp_map(const Manifold& m, const TangentVector& v);
TangentVector log_map(const Manifold& m, const Point& x, const Point& y);

GeodesicPolyline geodesic_trace(const Manifold& m, const TangentVector& v, double total_length,
                                double step);

double angle(const Manifold& m, const Point& x, const Point& y, const Point& z);

// Transport along a path through `path` (path.front() == v.base). Analytic
// kinds join consecutive vertices by minimizing geodesics; grids by straight
// chart segments.
TangentVector parallel_transport(const Manifold& m, std::span<const Point> path,
                                 const TangentVector& v);
TangentVector parallel_transport(const Manifold& m, const GeodesicPolyline& path,
                                 const TangentVector& v);

ExtLength lcr(const Manifold& m, const Point& x);

// Smallest sectional curvature on the closed ball B_radius(x).
double min_curvature_in_ball(const Manifold& m, const Point& x, double radius);

// Constant-curvature helpers shared by the comparison checks.
namespace model {
// Third side of a hinge with sides a, b and angle gamma in the plane of
// constant curvature -k (k >= 0; k = 0 is the Euclidean plane).
double hyperbolic_hinge_side(double a, double b, double gamma, double k);
// Same on the sphere of curvature k > 0.
double spherical_hinge_side(double a, double b, double gamma, double k);
// (1/2pi) * circumference of the radius-r circle in the plane of curvature -k.
double circle_factor(double k, double r);
}  // namespace model

}  // namespace ddrlab
