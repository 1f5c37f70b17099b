#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "ddrlab/ddr.hpp"
#include "ddrlab/eikonal.hpp"
#include "ddrlab/errors.hpp"
#include "oracles.hpp"

using namespace ddrlab;

namespace {

std::vector<Manifold> models() {
  return {Manifold::euclidean(1.0), Manifold::sphere(1.0), Manifold::hyperbolic(1.0)};
}

SampleSpec spec_for(const Manifold& m, oracle::Gen& gen, std::size_t count) {
  SampleSpec s;
  s.center = gen.point(m);
  if (m.kind() == ManifoldKind::hyperbolic_plane) s.center *= 0.5;
  s.radius = gen.rng.uniform(0.05, 0.6);
  s.count = count;
  s.seed = gen.rng.next();
  return s;
}

}  // namespace

TEST_CASE("observation samples start at the center and stay in the ball") {
  for (const auto& m : models()) {
    oracle::Gen gen(4);
    const auto spec = spec_for(m, gen, 64);
    const auto f = sample_observation_domain(m, spec);
    CHECK(f.size() == 64);
    CHECK(f.points[0] == spec.center);
    for (const auto& p : f.points) CHECK(oracle::distance(m, p, spec.center) <= spec.radius * (1 + 1e-9));
    CHECK(f.fill_distance > 0.0);
    CHECK(f.fill_distance < spec.radius);
  }
}

TEST_CASE("samples are reproducible from the seed") {
  const auto m = Manifold::euclidean(1.0);
  const auto a = sample_observation_domain(m, {{0, 0}, 1.0, 32, 9});
  const auto b = sample_observation_domain(m, {{0, 0}, 1.0, 32, 9});
  const auto c = sample_observation_domain(m, {{0, 0}, 1.0, 32, 10});
  CHECK(a.points == b.points);
  CHECK(a.fingerprint == b.fingerprint);
  CHECK(a.fingerprint != c.fingerprint);
}

TEST_CASE("sphere balls beyond the injectivity radius are rejected") {
  CHECK_THROWS_AS(sample_observation_domain(Manifold::sphere(1.0), {{0, 0}, 3.5, 8, 1}), OutsideDomain);
}

TEST_CASE("matrices are antisymmetric and satisfy the cocycle identity bitwise") {
  std::size_t built = 0;
  for (const auto& m : models()) {
    oracle::Gen gen(21);
    for (int k = 0; k < 334; ++k) {
      const auto f = sample_observation_domain(m, spec_for(m, gen, 12));
      const auto d = ddr_of_point(m, f, gen.point(m));
      ++built;
      for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(d(i, i) == 0.0);
        for (std::size_t j = 0; j < d.size(); ++j) {
          CHECK(d(i, j) == -d(j, i));
          for (std::size_t l = 0; l < d.size(); l += 5) CHECK(d(i, j) + d(j, l) == d(i, l));
        }
      }
    }
  }
  CHECK(built >= 1000);
}

TEST_CASE("entries are distance differences") {
  const auto m = Manifold::sphere(2.0);
  const auto f = make_observation_sample({{0.1, 0.2}, {-0.3, 0.4}, {1.0, -0.5}});
  const Point x{0.7, 0.1};
  const auto d = ddr_of_point(m, f, x);
  CHECK(d(0, 2) == doctest::Approx(oracle::sphere_distance(x, f.points[0], 2.0) -
                                   oracle::sphere_distance(x, f.points[2], 2.0)).epsilon(1e-10));
}

TEST_CASE("quantization bounds") {
  CHECK(DdrMatrix::quantize(1.0) == 1.0);
  CHECK(std::abs(DdrMatrix::quantize(0.1) - 0.1) <= std::ldexp(1.0, -41));
  CHECK_THROWS_AS(DdrMatrix::quantize(5000.0), InvalidArgument);
}

TEST_CASE("sup distance is 2-Lipschitz in the source") {
  for (const auto& m : models()) {
    oracle::Gen gen(8);
    for (int k = 0; k < 500; ++k) {
      const auto f = sample_observation_domain(m, spec_for(m, gen, 16));
      const Point x = gen.point(m), y = gen.point(m);
      const double sup = sup_distance(ddr_of_point(m, f, x), ddr_of_point(m, f, y));
      CHECK(sup <= 2.0 * oracle::distance(m, x, y) + 1e-9);
    }
  }
}

TEST_CASE("sup distance of matrices on different samples is refused") {
  const auto m = Manifold::euclidean(1.0);
  const auto f = sample_observation_domain(m, {{0, 0}, 1.0, 8, 1});
  const auto g = sample_observation_domain(m, {{0, 0}, 1.0, 8, 2});
  CHECK_THROWS_AS(sup_distance(ddr_of_point(m, f, {2, 0}), ddr_of_point(m, g, {2, 0})), SampleMismatch);
}

TEST_CASE("inversion recovers in-dataset sources") {
  const auto m = Manifold::hyperbolic(1.0);
  oracle::Gen gen(30);
  const auto f = sample_observation_domain(m, {{0.1, 0.0}, 0.5, 32, 3});
  std::vector<Point> xs;
  for (int k = 0; k < 60; ++k) xs.push_back(gen.point(m));
  const auto ds = ddr_dataset(m, f, xs, 2);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const auto inv = invert(ds, ds.matrices[k]);
    CHECK(inv.index == k);
    CHECK(inv.gap == 0.0);
    REQUIRE(inv.point.has_value());
    CHECK(*inv.point == xs[k]);
  }
}

TEST_CASE("blinded datasets hide sources") {
  const auto m = Manifold::euclidean(1.0);
  const auto f = sample_observation_domain(m, {{0, 0}, 1.0, 8, 1});
  const std::vector<Point> xs{{2, 0}, {0, 3}};
  const auto ds = ddr_dataset(m, f, xs).blind();
  CHECK(ds.sources.empty());
  CHECK(!ds.matrices[0].source().has_value());
  CHECK(!invert(ds, ds.matrices[1]).point.has_value());
  CHECK_THROWS_AS(fit_bilip_lower(ds, [](const Point&, const Point&) { return 0.0; }), InvalidArgument);
}

TEST_CASE("holder and lower constants are finite and positive") {
  for (const auto& m : models()) {
    oracle::Gen gen(12);
    auto spec = spec_for(m, gen, 32);
    const auto f = sample_observation_domain(m, spec);
    std::vector<Point> xs;
    for (int k = 0; k < 80; ++k) xs.push_back(gen.point(m));
    const auto ds = ddr_dataset(m, f, xs);
    const DistanceOracle d = [&](const Point& a, const Point& b) { return oracle::distance(m, a, b); };
    const auto c0 = fit_holder_constant(ds, d);
    const auto lo = fit_bilip_lower(ds, d);
    CHECK(std::isfinite(c0.value));
    CHECK(c0.value > 0.0);
    CHECK(lo.value > 0.0);
    CHECK(lo.value <= 2.0 + 1e-9);
  }
}

TEST_CASE("grid datasets record their solver tolerance") {
  const auto m = make_grid_manifold(Rect{{0, 0}, {1, 1}}, [](const Point&) { return Mat2(Mat2::Identity()); },
                                    1.0 / 32);
  const auto f = sample_observation_domain(m, {{0.5, 0.5}, 0.2, 16, 1});
  const std::vector<Point> xs{{0.2, 0.2}, {0.8, 0.7}};
  const auto ds = ddr_dataset(m, f, xs);
  CHECK(ds.tolerance == doctest::Approx(solver_tolerance(m.grid(), EikonalBackend::fast_marching)));
  CHECK(column_tolerance(Manifold::euclidean(1.0), {0, 0}) == 0.0);
}

TEST_CASE("datasets round-trip through disk") {
  const auto dir = std::filesystem::temp_directory_path() / "ddrlab-ds-test";
  std::filesystem::remove_all(dir);
  const auto m = Manifold::sphere(1.0);
  const auto f = sample_observation_domain(m, {{0.2, 0.1}, 0.4, 24, 5});
  const std::vector<Point> xs{{1.0, 0.2}, {-0.4, 0.5}, {2.0, -0.3}};
  const auto ds = ddr_dataset(m, f, xs);
  save_dataset(ds, dir);
  const auto back = load_dataset(dir);
  CHECK(back.sample.points == ds.sample.points);
  CHECK(back.sample.fingerprint == ds.sample.fingerprint);
  CHECK(back.sources == ds.sources);
  REQUIRE(back.size() == ds.size());
  for (std::size_t k = 0; k < ds.size(); ++k) CHECK(back.matrices[k].column() == ds.matrices[k].column());
  CHECK(back.manifold_id == ds.manifold_id);

  save_dataset(ds.blind(), dir);
  const auto blind = load_dataset(dir);
  CHECK(blind.blinded);
  CHECK(blind.sources.empty());
  std::filesystem::remove_all(dir);
}

TEST_CASE("hausdorff distance of a set to itself is zero") {
  const auto m = Manifold::euclidean(1.0);
  const std::vector<Point> a{{0, 0}, {1, 0}}, b{{0, 0}, {1, 0}, {1, 1}};
  CHECK(hausdorff_distance(m, a, a) == 0.0);
  CHECK(hausdorff_distance(m, a, b) == doctest::Approx(1.0));
}
