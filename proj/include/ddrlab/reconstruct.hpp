#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ddrlab/ddr.hpp"
#include "ddrlab/manifold.hpp"
#include "ddrlab/report.hpp"

namespace ddrlab {

struct MetricEstimate {
  Point base = Point::Zero();
  std::size_t index = 0;
  Mat2 tensor = Mat2::Identity();  // SPD, chart components
  std::size_t covectors = 0;
  double residual = 0.0;           // max |w^T g^{-1} w - 1| over used covectors
  double direction_spread = 0.0;   // sigma_min / sigma_max of the normalized design
  bool floored = false;            // eigenvalue floor was applied
  double floor = 0.0;

  json to_json() const;
};

struct ReconstructOptions {
  std::size_t neighbors = 12;
  double bandwidth_factor = 2.0;  // Gaussian bandwidth in units of the fill distance
  double min_spread = 1e-3;
};

// Metric at F-point y from blinded data: unit covectors d(D_x(., q0)) at y,
// then a least-squares fit of the inverse Gram matrix.
MetricEstimate reconstruct_metric_on_F(const DdrDataset& ds, std::size_t y, std::size_t q0,
                                       const ReconstructOptions& options = {});

// Gradient of f at sample point y by weighted quadratic least squares over
// its nearest neighbors (chart coordinates).
Vec2 sample_gradient(const ObservationSample& f, std::span<const double> values, std::size_t y,
                     const ReconstructOptions& options = {});

// Geodesic gamma_2 from x toward F-point p2 (unit initial direction) and a
// second F-point p1 on another geodesic from x. The quotient
// (D(gamma_2(t))(p1, p2) - D(x)(p1, p2)) / t tends to 1 - cos(angle).
struct AngleProbe {
  Point x = Point::Zero();
  TangentVector direction;  // unit initial direction of gamma_2
  std::size_t p1 = 0;
  std::size_t p2 = 0;
};

struct AngleRecovery {
  double angle = 0.0;
  double limit = 0.0;                // extrapolated 1 - cos
  std::array<double, 3> quotients{};  // at t0, t0/2, t0/4
};

AngleRecovery recover_angle(const Manifold& m, const ObservationSample& f, const AngleProbe& probe,
                            double t0, double eps = 0.05);

struct LambdaEstimate {
  double lambda = 0.0;
  double deviation = 0.0;  // |lambda - 1|
  std::size_t pairs = 0;
  double f_mismatch = 0.0;  // max |d1 - d2| over F pairs (consistency gate)
  std::vector<std::pair<double, double>> one_minus_cos;  // (side 1, side 2)
};

// Least-squares lambda in (1 - cos)_2 = lambda (1 - cos)_1 over matched probes.
// Both samples index the same abstract F; distances on F must agree within
// gate_tol first, otherwise InconsistentData.
LambdaEstimate estimate_lambda(const Manifold& m1, const ObservationSample& f1,
                               const Manifold& m2, const ObservationSample& f2,
                               std::span<const AngleProbe> probes1,
                               std::span<const AngleProbe> probes2, double t0, double gate_tol);

struct CorrespondenceReport {
  std::vector<std::pair<std::size_t, std::size_t>> matches;  // (ds1 index, ds2 index)
  std::vector<double> match_gaps;                            // sup-distance of each match
  double distortion = 0.0;
  double lambda = 1.0;  // comparison-angle scaling over matched triangles
  double angle_defect_max = 0.0;
  double angle_defect_mean = 0.0;
  std::size_t triangles = 0;
  bool injective = true;
  double hausdorff_sup = 0.0;  // sup-norm Hausdorff distance between the two image sets
  std::optional<double> f_fixed_error;  // max |phi(x) - x| over sources lying on F
  std::size_t chains_tested = 0;
  double chain_defect = 0.0;  // worst collinearity-in-distance defect after phi

  json to_json() const;
};

// phi = nearest ds2 matrix in sup-norm for every ds1 matrix. d1 and d2 give
// distances between sources on each side. The samples must index the same F
// (same size); charts may differ.
CorrespondenceReport gauge_isometry_test(const DdrDataset& ds1, const DdrDataset& ds2,
                                         const DistanceOracle& d1, const DistanceOracle& d2,
                                         unsigned jobs = 0);

struct StabilityCurve {
  std::vector<double> levels;
  std::vector<double> distortion;
  double floor = 0.0;  // distortion of clean data against itself
  double slope = 0.0;  // log-log slope over levels with positive distortion

  json to_json() const;
};

// Uniform noise in [-delta/2, delta/2] on each distance column. The same
// unit draws are reused for every level, so curves differ only by delta.
StabilityCurve stability_sweep(const DdrDataset& clean, const DistanceOracle& d,
                               std::span<const double> levels, std::uint64_t seed,
                               unsigned jobs = 0);

// Column-noise perturbation used by stability_sweep (draws in [-1/2, 1/2] scaled by delta).
DdrDataset perturb_dataset(const DdrDataset& clean, double delta, std::uint64_t seed);

}  // namespace ddrlab
