#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "ddrlab/errors.hpp"
#include "ddrlab/grid_metric.hpp"
#include "ddrlab/manifold.hpp"
#include "oracles.hpp"

using namespace ddrlab;
using std::numbers::pi;

namespace {

std::vector<Manifold> models() {
  return {Manifold::euclidean(1.0), Manifold::euclidean(2.5), Manifold::sphere(1.0),
          Manifold::sphere(3.0), Manifold::hyperbolic(1.0), Manifold::hyperbolic(0.5)};
}

Point chart_of(const Eigen::Vector3d& v) { return {std::atan2(v.y(), v.x()), std::asin(v.z())}; }

}  // namespace

TEST_CASE("euclidean distance scales with the metric") {
  CHECK(exact_distance(Manifold::euclidean(2.0), {0, 0}, {3, 4}) == doctest::Approx(10.0));
}

TEST_CASE("model distances match independent closed forms") {
  for (const auto& m : models()) {
    oracle::Gen gen(11);
    for (int k = 0; k < 500; ++k) {
      const Point a = gen.point(m), b = gen.point(m);
      CHECK(exact_distance(m, a, b) == doctest::Approx(oracle::distance(m, a, b)).epsilon(1e-9));
    }
  }
}

TEST_CASE("distance is symmetric and satisfies the triangle inequality") {
  for (const auto& m : models()) {
    oracle::Gen gen(5);
    for (int k = 0; k < 300; ++k) {
      const Point a = gen.point(m), b = gen.point(m), c = gen.point(m);
      const double ab = exact_distance(m, a, b);
      CHECK(ab == exact_distance(m, b, a));
      CHECK(exact_distance(m, a, c) <= ab + exact_distance(m, b, c) + 1e-12);
    }
  }
}

TEST_CASE("exp and log are inverse on models") {
  for (const auto& m : models()) {
    oracle::Gen gen(7);
    for (int k = 0; k < 300; ++k) {
      const Point x = gen.point(m), y = gen.point(m);
      const TangentVector v = log_map(m, x, y);
      CHECK(m.norm(v) == doctest::Approx(exact_distance(m, x, y)).epsilon(1e-9));
      const Point back = exp_map(m, v);
      CHECK(exact_distance(m, back, y) < 1e-9 * std::max(1.0, m.scale()));
    }
  }
}

TEST_CASE("antipodal log is a cut locus error") {
  const auto s = Manifold::sphere(1.0);
  CHECK_THROWS_AS(log_map(s, {0.3, 0.2}, {0.3 - pi, -0.2}), CutLocus);
}

TEST_CASE("points outside the model domain are rejected") {
  CHECK_THROWS_AS(exact_distance(Manifold::hyperbolic(1.0), {0.0, 0.0}, {1.0, 0.0}), OutsideDomain);
}

TEST_CASE("unit directions have unit length and the requested angle") {
  auto g = make_grid_manifold(Rect{{0, 0}, {1, 1}},
                              [](const Point& p) {
                                Mat2 t;
                                t << 1.0 + p.x(), 0.3, 0.3, 2.0;
                                return t;
                              },
                              1.0 / 32);
  std::vector<Manifold> all = models();
  all.push_back(g);
  for (const auto& m : all) {
    oracle::Gen gen(3);
    for (int k = 0; k < 50; ++k) {
      const Point x = gen.point(m);
      const double a = gen.angle(), b = gen.angle();
      const auto u = m.unit_direction(x, a), w = m.unit_direction(x, b);
      CHECK(m.norm(u) == doctest::Approx(1.0).epsilon(1e-12));
      const double expect = std::remainder(b - a, 2 * pi);
      CHECK(m.oriented_angle(x, u.components, w.components) == doctest::Approx(expect).epsilon(1e-9));
    }
  }
}

TEST_CASE("hinge sides match the hyperbolic law of cosines") {
  oracle::Gen gen(2);
  for (int k = 0; k < 200; ++k) {
    const double a = gen.rng.uniform(0.01, 3), b = gen.rng.uniform(0.01, 3);
    const double g = gen.rng.uniform(0.0, pi), K = gen.rng.uniform(0.1, 4);
    CHECK(model::hyperbolic_hinge_side(a, b, g, K) ==
          doctest::Approx(oracle::hyperbolic_side(a, b, g, K)).epsilon(1e-7));
  }
  CHECK(model::hyperbolic_hinge_side(3, 4, pi / 2, 0) == doctest::Approx(5.0));
}

TEST_CASE("circle factor") {
  CHECK(model::circle_factor(0.0, 2.0) == doctest::Approx(2.0));
  CHECK(model::circle_factor(4.0, 1.0) == doctest::Approx(std::sinh(2.0) / 2.0));
}

TEST_CASE("lower curvature radius on models") {
  CHECK(!lcr(Manifold::euclidean(1.0), {0, 0}).is_finite());
  CHECK(!lcr(Manifold::sphere(2.0), {0, 0}).is_finite());
  CHECK(lcr(Manifold::hyperbolic(1.0), {0.1, 0}).value() == doctest::Approx(1.0));
  CHECK(lcr(Manifold::hyperbolic(3.0), {0.1, 0}).value() == doctest::Approx(3.0));
}

TEST_CASE("brioschi curvature of the scaled half-plane metric is -4") {
  auto g = make_grid_manifold(Rect{{-0.5, 0.5}, {0.5, 1.5}},
                              [](const Point& p) { return Mat2(Mat2::Identity() / (4.0 * p.y() * p.y())); },
                              1.0 / 64);
  const auto& grid = g.grid();
  for (std::size_t j = 4; j + 4 < grid.ny(); j += 7)
    for (std::size_t i = 4; i + 4 < grid.nx(); i += 7) CHECK(grid.curvature(i, j) == doctest::Approx(-4.0).epsilon(0.01));
}

TEST_CASE("grid geodesics of the identity metric are straight") {
  auto g = make_grid_manifold(Rect{{0, 0}, {1, 1}}, [](const Point&) { return Mat2(Mat2::Identity()); },
                              1.0 / 32);
  const Point x{0.2, 0.3};
  const auto u = g.unit_direction(x, 0.7);
  const Point y = exp_map(g, {x, 0.5 * u.components});
  CHECK((y - (x + 0.5 * u.components)).norm() < 1e-12);
}

TEST_CASE("constant anisotropic metric has chart-line geodesics") {
  auto g = make_grid_manifold(Rect{{0, 0}, {2, 2}},
                              [](const Point&) {
                                Mat2 t;
                                t << 4.0, 1.0, 1.0, 2.0;
                                return t;
                              },
                              1.0 / 16);
  const Point x{0.5, 0.5};
  const TangentVector v{x, Vec2(0.1, 0.15)};
  const Point y = exp_map(g, v);
  CHECK((y - (x + v.components)).norm() < 1e-12);
}

TEST_CASE("grid geodesic traces stop at the domain edge") {
  auto g = make_grid_manifold(Rect{{0, 0}, {1, 1}}, [](const Point&) { return Mat2(Mat2::Identity()); },
                              1.0 / 16);
  const auto tr = geodesic_trace(g, g.unit_direction({0.5, 0.5}, 0.0), 2.0, 1.0 / 64);
  CHECK(tr.truncated);
  CHECK_THROWS_AS(exp_map(g, {Point(0.5, 0.5), Vec2(2.0, 0.0)}), OutsideDomain);
}

TEST_CASE("octant loop holonomy on the unit sphere is a quarter turn") {
  const auto s = Manifold::sphere(1.0);
  const Eigen::Matrix3d r = Eigen::AngleAxisd(0.4, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
  const Point a = chart_of(r.col(0)), b = chart_of(r.col(1)), c = chart_of(r.col(2));
  const std::vector<Point> loop{a, b, c, a};
  const auto v = s.unit_direction(a, 0.3);
  const auto w = parallel_transport(s, loop, v);
  CHECK(std::abs(s.oriented_angle(a, v.components, w.components)) == doctest::Approx(pi / 2).epsilon(1e-9));
}

TEST_CASE("transport preserves length on grids") {
  auto g = make_grid_manifold(Rect{{0, 0}, {1, 1}},
                              [](const Point& p) {
                                const double c = 1.0 + std::exp(-8.0 * (p - Point(0.5, 0.5)).squaredNorm());
                                return Mat2(c * c * Mat2::Identity());
                              },
                              1.0 / 64);
  const std::vector<Point> path{{0.2, 0.2}, {0.8, 0.3}, {0.6, 0.8}, {0.2, 0.2}};
  const auto v = g.unit_direction(path.front(), 1.0);
  const auto w = parallel_transport(g, path, v);
  CHECK(g.norm(w) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("angle at a vertex") {
  const auto e = Manifold::euclidean(1.0);
  CHECK(angle(e, {0, 0}, {1, 0}, {0, 2}) == doctest::Approx(pi / 2));
  const auto s = Manifold::sphere(1.0);
  CHECK(angle(s, {0, 0}, {0.5, 0}, {0, 0.5}) == doctest::Approx(pi / 2));
}

TEST_CASE("grid bounds queries are unavailable") {
  auto g = make_grid_manifold(Rect{{0, 0}, {1, 1}}, [](const Point&) { return Mat2(Mat2::Identity()); },
                              1.0 / 8);
  CHECK_THROWS(g.injectivity_radius());
  CHECK(Manifold::sphere(2.0).injectivity_radius().value() == doctest::Approx(2 * pi));
}

TEST_CASE("non-SPD tensors are rejected with the node") {
  try {
    make_grid_manifold(Rect{{0, 0}, {1, 1}},
                       [](const Point& p) -> Mat2 {
                         if (p.x() > 0.5 && p.y() > 0.5) return -Mat2::Identity();
                         return Mat2::Identity();
                       },
                       1.0 / 4);
    FAIL("expected NotSpd");
  } catch (const NotSpd& e) {
    CHECK(e.node_i >= 2);
    CHECK(e.node_j >= 2);
  }
}

TEST_CASE("manifold kinds parse") {
  CHECK(parse_manifold_kind("sphere") == ManifoldKind::round_sphere);
  CHECK(parse_manifold_kind("hyperbolic-plane") == ManifoldKind::hyperbolic_plane);
  CHECK_THROWS_AS(parse_manifold_kind("torus"), InvalidArgument);
}
