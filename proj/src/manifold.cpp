#include "ddrlab/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Geometry>
#include <Eigen/LU>

#include "ddrlab/eikonal.hpp"
#include "ddrlab/errors.hpp"

namespace ddrlab {

using std::numbers::pi;
using Vec3 = Eigen::Vector3d;
using Complex = std::complex<double>;

std::string to_string(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::euclidean_plane: return "euclidean-plane";
    case ManifoldKind::round_sphere: return "round-sphere";
    case ManifoldKind::hyperbolic_plane: return "hyperbolic-plane";
    case ManifoldKind::grid: return "grid";
  }
  return "unknown";
}

ManifoldKind parse_manifold_kind(const std::string& name) {
  if (name == "euclidean-plane" || name == "euclidean") return ManifoldKind::euclidean_plane;
  if (name == "round-sphere" || name == "sphere") return ManifoldKind::round_sphere;
  if (name == "hyperbolic-plane" || name == "hyperbolic") return ManifoldKind::hyperbolic_plane;
  if (name == "grid") return ManifoldKind::grid;
  throw InvalidArgument("unknown manifold kind '" + name + "'");
}

namespace {

// ---- sphere ---------------------------------------------------------------

Vec3 embed(const Point& p) {
  const double cl = std::cos(p.y());
  return {cl * std::cos(p.x()), cl * std::sin(p.x()), std::sin(p.y())};
}

Point chart(const Vec3& u) {
  return {std::atan2(u.y(), u.x()), std::atan2(u.z(), std::hypot(u.x(), u.y()))};
}

struct Frame {
  Vec3 east;
  Vec3 north;
};

Frame frame(const Point& p) {
  const double so = std::sin(p.x()), co = std::cos(p.x());
  const double sa = std::sin(p.y()), ca = std::cos(p.y());
  return {Vec3(-so, co, 0.0), Vec3(-sa * co, -sa * so, ca)};
}

Vec3 to_ambient(const Point& p, const Vec2& v) {
  const Frame f = frame(p);
  return v.x() * f.east + v.y() * f.north;
}

Vec2 to_frame(const Point& p, const Vec3& w) {
  const Frame f = frame(p);
  return {w.dot(f.east), w.dot(f.north)};
}

double sphere_distance(const Point& x, const Point& y, double r) {
  const Vec3 a = embed(x), b = embed(y);
  return r * std::atan2(a.cross(b).norm(), a.dot(b));
}

Vec2 sphere_log(const Point& x, const Point& y, double r) {
  const Vec3 a = embed(x), b = embed(y);
  const Vec3 c = a.cross(b);
  const double s = c.norm();
  const double cs = a.dot(b);
  if (s == 0.0) {
    if (cs < 0.0) throw CutLocus("sphere: antipodal points have no unique minimizing direction");
    return Vec2::Zero();
  }
  if (s < 1e-15 && cs < 0.0) {
    throw CutLocus("sphere: antipodal points have no unique minimizing direction");
  }
  const Vec3 w = c.cross(a) / s;
  return r * std::atan2(s, cs) * to_frame(x, w);
}

// Unit-speed great circle through x with initial unit frame direction u.
struct GreatCircle {
  Vec3 a;
  Vec3 e;
  double r;

  Point at(double t) const {
    return chart(std::cos(t / r) * a + std::sin(t / r) * e);
  }
  Vec2 tangent(double t) const {
    const Point p = at(t);
    return to_frame(p, -std::sin(t / r) * a + std::cos(t / r) * e);
  }
};

GreatCircle great_circle(const Point& x, const Vec2& unit, double r) {
  Vec3 e = to_ambient(x, unit);
  return {embed(x), e.normalized(), r};
}

// ---- hyperbolic (Poincare disk) --------------------------------------------

Complex cplx(const Point& p) { return {p.x(), p.y()}; }
Point real2(const Complex& z) { return {z.real(), z.imag()}; }

double one_minus_sq(const Point& x) {
  const double n = x.norm();
  return (1.0 - n) * (1.0 + n);
}

double hyperbolic_distance(const Point& x, const Point& y, double s) {
  const double num = (x - y).norm();
  const double den = std::sqrt(one_minus_sq(x) * one_minus_sq(y));
  return s * 2.0 * std::asinh(num / den);
}

Vec2 hyperbolic_log(const Point& x, const Point& y) {
  const Complex cx = cplx(x);
  const Complex z = (cplx(y) - cx) / (1.0 - std::conj(cx) * cplx(y));
  const double a = std::abs(z);
  if (a == 0.0) return Vec2::Zero();
  return one_minus_sq(x) * std::atanh(a) * real2(z / a);
}

Point hyperbolic_exp(const Point& x, const Vec2& v) {
  const double n = v.norm();
  if (n == 0.0) return x;
  const Complex u = cplx(v) / one_minus_sq(x);
  const double a = std::abs(u);
  const Complex w = std::tanh(a) * u / a;
  const Complex cx = cplx(x);
  return real2((w + cx) / (1.0 + std::conj(cx) * w));
}

// ---- grid ------------------------------------------------------------------

// Connection term Gamma^k_ij a^i b^j.
Vec2 connection(const Christoffel& gamma, const Vec2& a, const Vec2& b) {
  return {a.dot(gamma[0] * b), a.dot(gamma[1] * b)};
}

struct GeodesicState {
  Point x;
  Vec2 v;
};

// One RK4 step of the geodesic equation; false when a stage leaves the grid.
bool rk4_geodesic(const GridMetric& g, GeodesicState& s, double dt) {
  auto rhs = [&](const GeodesicState& y, GeodesicState& dy) {
    if (!g.contains(y.x)) return false;
    dy.x = y.v;
    dy.v = geodesic_acceleration(g.christoffel_at(y.x), y.v);
    return true;
  };
  GeodesicState k1, k2, k3, k4;
  if (!rhs(s, k1)) return false;
  if (!rhs({s.x + 0.5 * dt * k1.x, s.v + 0.5 * dt * k1.v}, k2)) return false;
  if (!rhs({s.x + 0.5 * dt * k2.x, s.v + 0.5 * dt * k2.v}, k3)) return false;
  if (!rhs({s.x + dt * k3.x, s.v + dt * k3.v}, k4)) return false;
  const GeodesicState next{s.x + dt / 6.0 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x),
                           s.v + dt / 6.0 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v)};
  if (!g.contains(next.x)) return false;
  s = next;
  return true;
}

Vec2 transport_segment(const GridMetric& g, const Point& a, const Point& b, Vec2 v) {
  const Vec2 d = b - a;
  const double len = d.norm();
  if (len == 0.0) return v;
  const int n = std::max(1, static_cast<int>(std::ceil(len / (g.spacing() / 8.0))));
  const double ds = 1.0 / n;
  auto rhs = [&](double s, const Vec2& w) {
    return Vec2(-connection(g.christoffel_at(a + s * d), d, w));
  };
  for (int k = 0; k < n; ++k) {
    const double s = k * ds;
    const Vec2 k1 = rhs(s, v);
    const Vec2 k2 = rhs(s + 0.5 * ds, v + 0.5 * ds * k1);
    const Vec2 k3 = rhs(s + 0.5 * ds, v + 0.5 * ds * k2);
    const Vec2 k4 = rhs(s + ds, v + ds * k3);
    v += ds / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return v;
}

void check_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(std::string(what) + " must be positive and finite");
  }
}

void require_analytic(const Manifold& m, const char* op) {
  if (!m.analytic()) {
    throw WrongManifoldKind(std::string(op) +
                            ": closed form unavailable on grid manifolds; use the eikonal solver");
  }
}

}  // namespace

// ---- Manifold ----------------------------------------------------------------

Manifold Manifold::euclidean(double scale) {
  check_positive(scale, "euclidean scale");
  return {ManifoldKind::euclidean_plane, scale, nullptr};
}

Manifold Manifold::sphere(double radius) {
  check_positive(radius, "sphere radius");
  return {ManifoldKind::round_sphere, radius, nullptr};
}

Manifold Manifold::hyperbolic(double scale) {
  check_positive(scale, "hyperbolic scale");
  return {ManifoldKind::hyperbolic_plane, scale, nullptr};
}

Manifold Manifold::from_grid(std::shared_ptr<const GridMetric> grid) {
  if (!grid) throw InvalidArgument("null grid metric");
  return {ManifoldKind::grid, 1.0, std::move(grid)};
}

std::string Manifold::id() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case ManifoldKind::euclidean_plane: os << "euclidean-plane(scale=" << scale_ << ")"; break;
    case ManifoldKind::round_sphere: os << "round-sphere(radius=" << scale_ << ")"; break;
    case ManifoldKind::hyperbolic_plane: os << "hyperbolic-plane(scale=" << scale_ << ")"; break;
    case ManifoldKind::grid:
      os << "grid(" << grid_->nx() << "x" << grid_->ny() << ",h=" << grid_->spacing() << ",hash="
         << std::hex << grid_->hash() << ")";
      break;
  }
  return os.str();
}

const GridMetric& Manifold::grid() const {
  if (!grid_) throw WrongManifoldKind("manifold is not a grid");
  return *grid_;
}

double Manifold::sec_min() const {
  switch (kind_) {
    case ManifoldKind::euclidean_plane: return 0.0;
    case ManifoldKind::round_sphere: return 1.0 / (scale_ * scale_);
    case ManifoldKind::hyperbolic_plane: return -1.0 / (scale_ * scale_);
    case ManifoldKind::grid: return grid_->curvature_min();
  }
  return 0.0;
}

double Manifold::sec_max() const {
  if (kind_ == ManifoldKind::grid) return grid_->curvature_max();
  return sec_min();
}

ExtLength Manifold::injectivity_radius() const {
  switch (kind_) {
    case ManifoldKind::round_sphere: return ExtLength(pi * scale_);
    case ManifoldKind::grid:
      throw WrongManifoldKind("injectivity radius is not computed for grid manifolds");
    default: return ExtLength::infinity();
  }
}

ExtLength Manifold::diameter() const {
  switch (kind_) {
    case ManifoldKind::round_sphere: return ExtLength(pi * scale_);
    case ManifoldKind::grid:
      throw WrongManifoldKind("diameter is not computed for grid manifolds");
    default: return ExtLength::infinity();
  }
}

bool Manifold::contains(const Point& p) const {
  if (!p.allFinite()) return false;
  switch (kind_) {
    case ManifoldKind::euclidean_plane: return true;
    case ManifoldKind::round_sphere: return std::abs(p.y()) <= 0.5 * pi + 1e-12;
    case ManifoldKind::hyperbolic_plane: return p.norm() < 1.0;
    case ManifoldKind::grid: return grid_->contains(p);
  }
  return false;
}

void Manifold::require_contains(const Point& p, const char* what) const {
  if (!contains(p)) {
    std::ostringstream os;
    os << what << ": point (" << p.x() << ", " << p.y() << ") outside the domain of " << id();
    throw OutsideDomain(os.str());
  }
}

Mat2 Manifold::metric(const Point& p) const {
  switch (kind_) {
    case ManifoldKind::euclidean_plane: return scale_ * scale_ * Mat2::Identity();
    case ManifoldKind::round_sphere: return Mat2::Identity();
    case ManifoldKind::hyperbolic_plane: {
      const double c = 2.0 * scale_ / one_minus_sq(p);
      return c * c * Mat2::Identity();
    }
    case ManifoldKind::grid: return grid_->metric_at(p);
  }
  return Mat2::Identity();
}

double Manifold::inner(const Point& base, const Vec2& a, const Vec2& b) const {
  return a.dot(metric(base) * b);
}

double Manifold::norm(const TangentVector& v) const {
  return std::sqrt(inner(v.base, v.components, v.components));
}

TangentVector Manifold::unit(const TangentVector& v) const {
  const double n = norm(v);
  if (!(n > 0.0)) throw InvalidArgument("cannot normalize a zero tangent vector");
  return {v.base, v.components / n};
}

Vec2 Manifold::rotate_quarter(const Point& base, const Vec2& v) const {
  const Mat2 g = metric(base);
  Mat2 r;
  r << -g(0, 1), -g(1, 1), g(0, 0), g(0, 1);
  return r * v / std::sqrt(g.determinant());
}

TangentVector Manifold::unit_direction(const Point& base, double theta) const {
  const Mat2 g = metric(base);
  const Eigen::LLT<Mat2> llt(g);
  const Mat2 lt = llt.matrixU();
  const Vec2 e(std::cos(theta), std::sin(theta));
  return {base, lt.triangularView<Eigen::Upper>().solve(e)};
}

double Manifold::oriented_angle(const Point& base, const Vec2& a, const Vec2& b) const {
  const Mat2 g = metric(base);
  Mat2 r;
  r << -g(0, 1), -g(1, 1), g(0, 0), g(0, 1);
  const Vec2 ra = r * a / std::sqrt(g.determinant());
  return std::atan2(ra.dot(g * b), a.dot(g * b));
}

double Manifold::unsigned_angle(const Point& base, const Vec2& a, const Vec2& b) const {
  return std::abs(oriented_angle(base, a, b));
}

// ---- free operations ---------------------------------------------------------

Manifold make_model_manifold(ManifoldKind kind, const ModelParams& params) {
  switch (kind) {
    case ManifoldKind::euclidean_plane: return Manifold::euclidean(params.scale);
    case ManifoldKind::round_sphere: return Manifold::sphere(params.radius);
    case ManifoldKind::hyperbolic_plane: return Manifold::hyperbolic(params.scale);
    case ManifoldKind::grid: break;
  }
  throw InvalidArgument("make_model_manifold: not an analytic model kind");
}

Manifold make_grid_manifold(const Rect& domain, const std::function<Mat2(const Point&)>& metric_fn,
                            double h) {
  return Manifold::from_grid(
      std::make_shared<const GridMetric>(GridMetric::sample(domain, metric_fn, h)));
}

double exact_distance(const Manifold& m, const Point& x, const Point& y) {
  require_analytic(m, "exact_distance");
  m.require_contains(x, "exact_distance");
  m.require_contains(y, "exact_distance");
  switch (m.kind()) {
    case ManifoldKind::euclidean_plane: return m.scale() * (x - y).norm();
    case ManifoldKind::round_sphere: return sphere_distance(x, y, m.scale());
    case ManifoldKind::hyperbolic_plane: return hyperbolic_distance(x, y, m.scale());
    case ManifoldKind::grid: break;
  }
  return 0.0;
}

TangentVector log_map(const Manifold& m, const Point& x, const Point& y) {
  require_analytic(m, "log_map");
  m.require_contains(x, "log_map");
  m.require_contains(y, "log_map");
  switch (m.kind()) {
    case ManifoldKind::euclidean_plane: return {x, y - x};
    case ManifoldKind::round_sphere: return {x, sphere_log(x, y, m.scale())};
    case ManifoldKind::hyperbolic_plane: return {x, hyperbolic_log(x, y)};
    case ManifoldKind::grid: break;
  }
  return {x, Vec2::Zero()};
}

Point exp_map(const Manifold& m, const TangentVector& v) {
  m.require_contains(v.base, "exp_map");
  switch (m.kind()) {
    case ManifoldKind::euclidean_plane: return v.base + v.components;
    case ManifoldKind::round_sphere: {
      const double n = v.components.norm();
      if (n == 0.0) return v.base;
      return great_circle(v.base, v.components / n, m.scale()).at(n);
    }
    case ManifoldKind::hyperbolic_plane: return hyperbolic_exp(v.base, v.components);
    case ManifoldKind::grid: {
      const double n = m.norm(v);
      if (n == 0.0) return v.base;
      const auto trace = geodesic_trace(m, m.unit(v), n, m.grid().spacing() / 4.0);
      if (trace.truncated) throw OutsideDomain("exp_map: geodesic leaves the grid domain");
      return trace.end();
    }
  }
  return v.base;
}

GeodesicPolyline geodesic_trace(const Manifold& m, const TangentVector& v, double total_length,
                                double step) {
  m.require_contains(v.base, "geodesic_trace");
  if (!(total_length >= 0.0) || !std::isfinite(total_length)) {
    throw InvalidArgument("geodesic_trace: total_length must be finite and nonnegative");
  }
  check_positive(step, "geodesic_trace step");
  const double speed = m.norm(v);
  if (std::abs(speed - 1.0) > 1e-6) {
    throw InvalidArgument("geodesic_trace: initial vector must have unit g-norm");
  }
  const TangentVector u = m.unit(v);

  GeodesicPolyline out;
  out.initial = u;
  out.vertices.push_back(u.base);
  out.arc_length.push_back(0.0);

  const auto n_steps = static_cast<std::size_t>(std::ceil(total_length / step - 1e-12));
  auto t_at = [&](std::size_t k) {
    return k == n_steps ? total_length : static_cast<double>(k) * step;
  };

  switch (m.kind()) {
    case ManifoldKind::euclidean_plane: {
      const Vec2 dir = u.components;
      for (std::size_t k = 1; k <= n_steps; ++k) {
        out.vertices.push_back(u.base + t_at(k) * dir);
        out.arc_length.push_back(t_at(k));
      }
      out.final = {out.vertices.back(), dir};
      return out;
    }
    case ManifoldKind::round_sphere: {
      const auto gc = great_circle(u.base, u.components, m.scale());
      for (std::size_t k = 1; k <= n_steps; ++k) {
        out.vertices.push_back(gc.at(t_at(k)));
        out.arc_length.push_back(t_at(k));
      }
      out.final = n_steps == 0 ? u : TangentVector{out.vertices.back(), gc.tangent(total_length)};
      return out;
    }
    case ManifoldKind::hyperbolic_plane: {
      const double s = m.scale();
      const Complex cx = cplx(u.base);
      const Complex e = cplx(u.components) / std::abs(cplx(u.components));
      const double omx = one_minus_sq(u.base);
      auto point = [&](double t) {
        const Complex w = std::tanh(t / (2.0 * s)) * e;
        return real2((w + cx) / (1.0 + std::conj(cx) * w));
      };
      auto tangent = [&](double t) {
        const Complex w = std::tanh(t / (2.0 * s)) * e;
        const double ch = std::cosh(t / (2.0 * s));
        const Complex dw = e / (2.0 * s * ch * ch);
        const Complex den = 1.0 + std::conj(cx) * w;
        return real2(omx / (den * den) * dw);
      };
      for (std::size_t k = 1; k <= n_steps; ++k) {
        out.vertices.push_back(point(t_at(k)));
        out.arc_length.push_back(t_at(k));
      }
      const Point end = out.vertices.back();
      out.final = m.unit({end, tangent(total_length)});
      return out;
    }
    case ManifoldKind::grid: {
      const GridMetric& g = m.grid();
      const double max_dt = g.spacing() / 4.0;
      GeodesicState s{u.base, u.components};
      double t = 0.0;
      for (std::size_t k = 1; k <= n_steps; ++k) {
        const double target = t_at(k);
        const int sub = std::max(1, static_cast<int>(std::ceil((target - t) / max_dt - 1e-12)));
        const double dt = (target - t) / sub;
        for (int q = 0; q < sub; ++q) {
          if (!rk4_geodesic(g, s, dt)) {
            out.truncated = true;
            break;
          }
          t += dt;
        }
        if (out.truncated) {
          if (t > out.arc_length.back()) {
            out.vertices.push_back(s.x);
            out.arc_length.push_back(t);
          }
          break;
        }
        t = target;
        out.vertices.push_back(s.x);
        out.arc_length.push_back(t);
      }
      out.final = m.unit({s.x, s.v});
      return out;
    }
  }
  return out;
}

double angle(const Manifold& m, const Point& x, const Point& y, const Point& z) {
  if (m.analytic()) {
    const auto a = log_map(m, x, y);
    const auto b = log_map(m, x, z);
    if (a.components.isZero(0.0) || b.components.isZero(0.0)) {
      throw InvalidArgument("angle: vertex coincides with an endpoint");
    }
    return m.unsigned_angle(x, a.components, b.components);
  }
  // Grid: the direction of [xy] at x is minus the gradient of d(y, .).
  auto& cache = FieldCache::global();
  const auto fy = cache.get(m, y);
  const auto fz = cache.get(m, z);
  const Vec2 a = -grad_distance(*fy, x).components;
  const Vec2 b = -grad_distance(*fz, x).components;
  return m.unsigned_angle(x, a, b);
}

TangentVector parallel_transport(const Manifold& m, std::span<const Point> path,
                                 const TangentVector& v) {
  if (path.empty()) throw InvalidArgument("parallel_transport: empty path");
  if ((path.front() - v.base).norm() > 1e-12) {
    throw InvalidArgument("parallel_transport: vector is not based at the path start");
  }
  for (const auto& p : path) m.require_contains(p, "parallel_transport");

  if (m.kind() == ManifoldKind::euclidean_plane) return {path.back(), v.components};

  if (m.kind() == ManifoldKind::grid) {
    Vec2 w = v.components;
    for (std::size_t k = 1; k < path.size(); ++k) {
      w = transport_segment(m.grid(), path[k - 1], path[k], w);
    }
    return {path.back(), w};
  }

  // Analytic: along the minimizing geodesic a -> b the transported vector keeps
  // its components in the (tangent, rotated tangent) frame.
  Vec2 w = v.components;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const Point& a = path[k - 1];
    const Point& b = path[k];
    const Vec2 la = log_map(m, a, b).components;
    if (la.isZero(0.0)) continue;
    const Vec2 ua = la / m.norm({a, la});
    const Vec2 lb = -log_map(m, b, a).components;
    const Vec2 ub = lb / m.norm({b, lb});
    const double p = m.inner(a, w, ua);
    const double q = m.inner(a, w, m.rotate_quarter(a, ua));
    w = p * ub + q * m.rotate_quarter(b, ub);
  }
  return {path.back(), w};
}

TangentVector parallel_transport(const Manifold& m, const GeodesicPolyline& path,
                                 const TangentVector& v) {
  return parallel_transport(m, std::span<const Point>(path.vertices), v);
}

double min_curvature_in_ball(const Manifold& m, const Point& x, double radius) {
  m.require_contains(x, "min_curvature_in_ball");
  if (m.analytic()) return m.sec_min();
  const auto field = FieldCache::global().get(m, x);
  const GridMetric& g = m.grid();
  double k_min = std::numeric_limits<double>::infinity();
  const auto& vals = field->values();
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (vals[n] <= radius) k_min = std::min(k_min, g.curvatures()[n]);
  }
  if (!std::isfinite(k_min)) k_min = g.curvatures()[g.nearest_node(x)];
  return k_min;
}

ExtLength lcr(const Manifold& m, const Point& x) {
  m.require_contains(x, "lcr");
  switch (m.kind()) {
    case ManifoldKind::euclidean_plane:
    case ManifoldKind::round_sphere: return ExtLength::infinity();
    case ManifoldKind::hyperbolic_plane: return ExtLength(m.scale());
    case ManifoldKind::grid: break;
  }
  const GridMetric& g = m.grid();
  if (g.curvature_min() >= 0.0) return ExtLength::infinity();

  // Balls are restricted to the grid domain. With nodes sorted by distance,
  // the running minimum curvature m_k is constant while 2r stays between the
  // k-th and (k+1)-th distances, so each interval is decided in closed form.
  const auto field = FieldCache::global().get(m, x);
  const auto& vals = field->values();
  std::vector<std::size_t> order(g.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return vals[a] < vals[b] || (vals[a] == vals[b] && a < b);
  });
  double k_min = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < order.size(); ++n) {
    k_min = std::min(k_min, g.curvatures()[order[n]]);
    const double lo = 0.5 * vals[order[n]];
    const double hi = n + 1 < order.size() ? 0.5 * vals[order[n + 1]]
                                           : std::numeric_limits<double>::infinity();
    if (k_min >= 0.0) continue;
    const double r_max = 1.0 / std::sqrt(-k_min);
    if (r_max <= lo) return ExtLength(lo);
    if (r_max < hi) return ExtLength(r_max);
  }
  return ExtLength::infinity();
}

namespace model {

double hyperbolic_hinge_side(double a, double b, double gamma, double k) {
  const double s2 = std::sin(0.5 * gamma);
  if (k <= 0.0) {
    const double d = a - b;
    return std::sqrt(d * d + 4.0 * a * b * s2 * s2);
  }
  const double q = std::sqrt(k);
  const double sh = std::sinh(0.5 * q * (a - b));
  const double v = sh * sh + std::sinh(q * a) * std::sinh(q * b) * s2 * s2;
  return 2.0 * std::asinh(std::sqrt(v)) / q;
}

double spherical_hinge_side(double a, double b, double gamma, double k) {
  if (k <= 0.0) throw InvalidArgument("spherical_hinge_side: curvature must be positive");
  const double q = std::sqrt(k);
  const double s2 = std::sin(0.5 * gamma);
  const double sd = std::sin(0.5 * q * (a - b));
  const double v = sd * sd + std::sin(q * a) * std::sin(q * b) * s2 * s2;
  return 2.0 * std::asin(std::sqrt(std::clamp(v, 0.0, 1.0))) / q;
}

double circle_factor(double k, double r) {
  if (k <= 0.0) return r;
  const double q = std::sqrt(k);
  return std::sinh(q * r) / q;
}

}  // namespace model

}  // namespace ddrlab
