#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "ddrlab/eikonal.hpp"
#include "ddrlab/errors.hpp"
#include "ddrlab/grid_metric.hpp"

using namespace ddrlab;

namespace {

Manifold identity_grid(double h, double side = 1.0) {
  return make_grid_manifold(Rect{{0, 0}, {side, side}}, [](const Point&) { return Mat2(Mat2::Identity()); }, h);
}

Mat2 bump(const Point& p) {
  const double c = 1.0 + std::exp(-8.0 * (p - Point(0.5, 0.5)).squaredNorm());
  return c * c * Mat2::Identity();
}

double max_error_vs_euclid(const DistanceField& f) {
  const auto& g = f.grid();
  double worst = 0.0;
  for (std::size_t j = 0; j < g.ny(); ++j)
    for (std::size_t i = 0; i < g.nx(); ++i)
      worst = std::max(worst, std::abs(f.value(i, j) - (g.node(i, j) - f.source()).norm()));
  return worst;
}

}  // namespace

TEST_CASE("fast marching converges at first order on the identity metric") {
  double prev = 0.0;
  for (int n : {64, 128, 256}) {
    const auto m = identity_grid(1.0 / n);
    const auto f = solve_distance_field(m, {0.5, 0.5});
    const double err = max_error_vs_euclid(f);
    CHECK(err <= 2.0 / n);
    if (prev > 0.0) {
      CHECK(err / prev >= 0.4);
      CHECK(err / prev <= 0.7);
    }
    prev = err;
  }
}

TEST_CASE("corner value of a centered source") {
  const double h = 1.0 / 128;
  const auto f = solve_distance_field(identity_grid(h), {0.5, 0.5});
  CHECK(std::abs(f.value(128, 128) - std::sqrt(0.5)) <= 2 * h);
}

TEST_CASE("residual is small and shrinks under refinement") {
  const auto a = solve_distance_field(identity_grid(1.0 / 64), {0.4, 0.55});
  const auto b = solve_distance_field(identity_grid(1.0 / 128), {0.4, 0.55});
  CHECK(b.residual() <= 0.05);
  CHECK(b.residual() <= 0.65 * a.residual());
  CHECK(residual_check(b) == b.residual());
}

TEST_CASE("constant conformal factor scales values exactly") {
  const auto one = identity_grid(1.0 / 64);
  const auto two = make_grid_manifold(Rect{{0, 0}, {1, 1}}, [](const Point&) { return Mat2(4.0 * Mat2::Identity()); },
                                      1.0 / 64);
  const auto a = solve_distance_field(one, {0.3, 0.7});
  const auto b = solve_distance_field(two, {0.3, 0.7});
  for (std::size_t k = 0; k < a.values().size(); ++k) {
    CHECK(std::abs(b.values()[k] - 2.0 * a.values()[k]) <= 1e-12 * std::max(1.0, b.values()[k]));
  }
}

TEST_CASE("bump metric matches a refined stencil oracle") {
  const double h = 1.0 / 32;
  const auto coarse = make_grid_manifold(Rect{{0, 0}, {1, 1}}, bump, h);
  const auto fine = make_grid_manifold(Rect{{0, 0}, {1, 1}}, bump, h / 4);
  const Point src{0.2, 0.3};
  const auto a = solve_distance_field(coarse, src);
  SolveOptions o;
  o.backend = EikonalBackend::dijkstra;
  o.stencil_radius = 4;
  const auto b = solve_distance_field(fine, src, o);
  double worst = 0.0;
  for (std::size_t j = 0; j < coarse.grid().ny(); ++j)
    for (std::size_t i = 0; i < coarse.grid().nx(); ++i)
      worst = std::max(worst, std::abs(a.value(i, j) - b.value(4 * i, 4 * j)));
  CHECK(worst <= 3 * h);
}

TEST_CASE("stencil dijkstra handles a constant anisotropic metric") {
  Mat2 t;
  t << 1.0, 0.0, 0.0, 4.0;
  const auto m = make_grid_manifold(Rect{{0, 0}, {1, 1}}, [t](const Point&) { return t; }, 1.0 / 64);
  CHECK(default_backend(m.grid()) == EikonalBackend::dijkstra);
  CHECK_THROWS_AS(solve_distance_field(m, {0.5, 0.5}, {EikonalBackend::fast_marching, 2}), InvalidArgument);
  const auto f = solve_distance_field(m, {0.5, 0.5});
  const auto& g = m.grid();
  double worst = 0.0;
  for (std::size_t j = 0; j < g.ny(); ++j)
    for (std::size_t i = 0; i < g.nx(); ++i) {
      const Vec2 d = g.node(i, j) - Point(0.5, 0.5);
      worst = std::max(worst, std::abs(f.value(i, j) - std::sqrt(d.dot(t * d))));
    }
  CHECK(worst <= f.tolerance());
}

TEST_CASE("distance field is consistent with its tolerance at off-node points") {
  const auto m = identity_grid(1.0 / 64);
  const auto f = solve_distance_field(m, {0.31, 0.62});
  for (const Point p : {Point(0.1, 0.1), Point(0.77, 0.93), Point(0.5, 0.5)}) {
    CHECK(std::abs(eval_distance(f, p) - (p - f.source()).norm()) <= f.tolerance());
  }
  CHECK_THROWS_AS(eval_distance(f, {1.5, 0.5}), OutsideDomain);
}

TEST_CASE("distance gradient is a unit vector pointing away from the source") {
  const auto m = identity_grid(1.0 / 128);
  const auto f = solve_distance_field(m, {0.3, 0.3});
  const auto g = grad_distance(f, {0.7, 0.6});
  CHECK(m.norm(g) == doctest::Approx(1.0).epsilon(0.03));
  CHECK(g.components.normalized().dot(Vec2(0.4, 0.3).normalized()) > 0.999);
  CHECK_THROWS(grad_distance(f, {0.3, 0.31}));
}

TEST_CASE("boundary nodes are marked") {
  const auto f = solve_distance_field(identity_grid(1.0 / 16), {0.5, 0.5});
  CHECK(f.status()[0] == NodeStatus::boundary_affected);
  CHECK(f.status()[f.grid().index(8, 8)] == NodeStatus::accepted);
}

TEST_CASE("distance on a grid is zero at the source and nearly symmetric") {
  const auto m = make_grid_manifold(Rect{{0, 0}, {1, 1}}, bump, 1.0 / 64);
  const Point x{0.2, 0.7}, y{0.8, 0.4};
  CHECK(distance(m, x, x) == 0.0);
  const double eps = solver_tolerance(m.grid(), default_backend(m.grid()));
  CHECK(std::abs(distance(m, x, y) - distance(m, y, x)) <= 2 * eps);
}

TEST_CASE("solver tolerance grows with the metric scale") {
  const auto one = identity_grid(1.0 / 64);
  const auto big = make_grid_manifold(Rect{{0, 0}, {1, 1}}, [](const Point&) { return Mat2(9.0 * Mat2::Identity()); },
                                      1.0 / 64);
  const double a = solver_tolerance(one.grid(), EikonalBackend::fast_marching);
  CHECK(solver_tolerance(big.grid(), EikonalBackend::fast_marching) == doctest::Approx(3.0 * a));
  CHECK(stencil_anisotropy_bound(2, 1.0, 9.0) > stencil_anisotropy_bound(2, 1.0, 1.0));
  CHECK(stencil_anisotropy_bound(4, 1.0, 1.0) < stencil_anisotropy_bound(2, 1.0, 1.0));
}

TEST_CASE("field cache memoizes and persists") {
  const auto dir = std::filesystem::temp_directory_path() / "ddrlab-test-cache";
  std::filesystem::remove_all(dir);
  FieldCache cache;
  cache.set_directory(dir);
  const auto m = identity_grid(1.0 / 32);
  const auto a = cache.get(m, {0.25, 0.5});
  const auto b = cache.get(m, {0.25, 0.5});
  CHECK(a.get() == b.get());
  CHECK(cache.hits() == 1);
  CHECK(cache.misses() == 1);
  const auto listed = cache.list_disk();
  REQUIRE(listed.size() == 1);
  CHECK(listed[0].grid_hash == m.grid().hash());
  CHECK(listed[0].source == Point(0.25, 0.5));

  cache.clear_memory();
  const auto c = cache.get(m, {0.25, 0.5});
  CHECK(c->values() == a->values());
  CHECK(c->status() == a->status());
  CHECK(c->tolerance() == a->tolerance());
  CHECK(cache.clear_disk() == 1);
  CHECK(cache.list_disk().empty());
  std::filesystem::remove_all(dir);
}

TEST_CASE("field files reject a different grid") {
  const auto path = std::filesystem::temp_directory_path() / "ddrlab-field-test.bin";
  const auto m = identity_grid(1.0 / 16);
  const auto f = solve_distance_field(m, {0.5, 0.5});
  write_field_file(path, f);
  CHECK(read_field_file(path, m.grid_ptr()).has_value());
  const auto other = identity_grid(1.0 / 16, 2.0);
  CHECK(!read_field_file(path, other.grid_ptr()).has_value());
  std::filesystem::remove(path);
}
