#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ddrlab/manifold.hpp"
#include "ddrlab/report.hpp"

namespace ddrlab {

struct SampleSpec {
  Point center = Point::Zero();
  double radius = 1.0;
  std::size_t count = 64;
  std::uint64_t seed = 0;
};

// Finite stand-in for the observation domain F. points[0] is the ball
// center q0 for sampled balls.
struct ObservationSample {
  std::vector<Point> points;
  Point center = Point::Zero();
  double radius = 0.0;
  std::uint64_t seed = 0;
  double fill_distance = 0.0;
  std::uint64_t fingerprint = 0;

  std::size_t size() const { return points.size(); }
};

ObservationSample sample_observation_domain(const Manifold& m, const SampleSpec& spec);

// Wraps explicit points (e.g. boundary stations); center/radius describe the
// region the fill distance is measured against (radius 0: not measured).
ObservationSample make_observation_sample(std::vector<Point> points, Point center = Point::Zero(),
                                          double radius = 0.0);

std::uint64_t sample_fingerprint(std::span<const Point> points);

// max over probe points of the ball of the distance to the nearest sample
// point (local-metric approximation on grids).
double measure_fill_distance(const Manifold& m, std::span<const Point> points, const Point& center,
                             double radius, std::size_t probes = 2048);

// Hausdorff distance between two point sets (same approximation).
double hausdorff_distance(const Manifold& m, std::span<const Point> a, std::span<const Point> b);

// Distances are stored as one column quantized to multiples of 2^-40, so
// every difference c_i - c_j is exact and D is antisymmetric and satisfies
// the cocycle identity bitwise.
class DdrMatrix {
 public:
  static constexpr int kQuantumExponent = -40;
  static constexpr double kColumnLimit = 4096.0;

  DdrMatrix(std::span<const double> distances, std::uint64_t fingerprint,
            std::optional<Point> source = std::nullopt);

  static double quantize(double value);

  std::size_t size() const { return column_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return column_[i] - column_[j]; }
  const std::vector<double>& column() const { return column_; }
  const std::optional<Point>& source() const { return source_; }
  std::uint64_t fingerprint() const { return fingerprint_; }
  DdrMatrix blinded() const;

 private:
  std::vector<double> column_;
  std::uint64_t fingerprint_;
  std::optional<Point> source_;
};

DdrMatrix ddr_of_point(const Manifold& m, const ObservationSample& f, const Point& x);

double sup_distance(const DdrMatrix& a, const DdrMatrix& b);

struct DdrDataset {
  ObservationSample sample;
  std::vector<Point> sources;
  std::vector<DdrMatrix> matrices;
  std::string manifold_id;
  double tolerance = 0.0;  // largest solver tolerance over the columns
  bool boundary = false;
  bool blinded = false;

  std::size_t size() const { return matrices.size(); }
  DdrDataset blind() const;
};

DdrDataset ddr_dataset(const Manifold& m, const ObservationSample& f, std::span<const Point> xs,
                       unsigned jobs = 0);

// Solver tolerance attached to columns computed from x (0 for analytic kinds).
double column_tolerance(const Manifold& m, const Point& x);

struct Inversion {
  std::size_t index = 0;
  std::optional<Point> point;
  double gap = 0.0;
};

Inversion invert(const DdrDataset& ds, const DdrMatrix& target);

using DistanceOracle = std::function<double(const Point&, const Point&)>;

// C0 = max |xy| / sqrt(sup + eps_floor) over pairs with sup below the 25th
// percentile of all pairwise sup-distances.
ConstantFit fit_holder_constant(const DdrDataset& ds, const DistanceOracle& oracle);

// c0 = min sup / |xy| over pairs closer than 10% of the source-cloud diameter.
ConstantFit fit_bilip_lower(const DdrDataset& ds, const DistanceOracle& oracle);

// Dataset directory: manifest.json + columns.f64 (sources x points, row-major).
void save_dataset(const DdrDataset& ds, const std::filesystem::path& dir);
DdrDataset load_dataset(const std::filesystem::path& dir);

}  // namespace ddrlab
