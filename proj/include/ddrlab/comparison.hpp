#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ddrlab/manifold.hpp"
#include "ddrlab/report.hpp"

namespace ddrlab {

inline constexpr double kDefaultC = 4.0;
inline constexpr double kDefaultShortcutC = 1.0 / (std::numbers::pi * std::numbers::pi);

// Slack allowed on margins: 1e-8 on analytic kinds, 6 epsilon_h on grids.
double check_tolerance(const Manifold& m);

// (1/2pi) * length of the radius-R circle in the plane of curvature -K,
// and its reciprocal.
double c_kr(double k, double r);
double lambda_kr(double k, double r);

// Every check returns margin = RHS - LHS of the tested inequality.

HingeRecord hinge_comparison_check(const Manifold& m, const Point& x, const Point& y,
                                   const Point& z, double k);

// |py| <= |px| - |xy| cos(pxy) + C |xy|^2 / min{|px|, lcr(x)}; implied C recorded.
HingeRecord lemma_1var_check(const Manifold& m, const Point& p, const Point& x, const Point& y,
                             double c = kDefaultC);

struct ShortMedianResult {
  HingeRecord first_variation;  // | |px| - |py| - |xy| cos(pxy) | <= C |xy|^2 / r
  HingeRecord median;           // |py| + |yq| <= |pq| + 2C |xy|^2 / r
};
ShortMedianResult short_median_check(const Manifold& m, const Point& p, const Point& q,
                                     const Point& x, const Point& y, double c = kDefaultC);

// |xy| + |xz| - |yz| >= c alpha^2 min{|xy|, |xz|, lcr(x)}, alpha = pi - angle yxz.
HingeRecord shortcut_check(const Manifold& m, const Point& x, const Point& y, const Point& z,
                           double c = kDefaultShortcutC);

// |yz| <= C_{K,R} angle + ||xy| - |xz||, and with 2|xy| in place of C_{K,R}
// when |xy| <= lcr(x). The margin is the smaller of the applicable two.
HingeRecord lipexp_check(const Manifold& m, const Point& x, const Point& y, const Point& z,
                         double k, double r);

// Angular measure of the directions at x of minimizing geodesics into the
// geodesic ball B(center, radius); x must lie outside the ball.
double direction_set_angle(const Manifold& m, const Point& x, const Point& center, double radius);
std::optional<double> direction_set_angle_closed_form(const Manifold& m, double ell, double radius);
double geodesic_ball_area(const Manifold& m, double radius);

// measured angle >= lambda_{K,R} area(B) / diam(B).
HingeRecord dir_measure_check(const Manifold& m, const Point& x, const Point& center,
                              double radius, double k, double r);

struct ExtensionResult {
  double extension = 0.0;  // largest minimizing extension |xy| found
  double implied_lambda0 = 0.0;
  double scale = 0.0;      // min{|pq|, r0, K^{-1/2}}
  bool capped = false;     // still minimizing at the search cap
  Point endpoint = Point::Zero();
};

ExtensionResult extension_search(const Manifold& m, const Point& p, const Point& q,
                                 const Point& x, double r0, double k, double cap);

// Corollary-style first variation with the extension scale:
// implied Lambda = | |px| - |pz| - |xz| cos(pxz) | * min{|px|, |pq|, r0, K^{-1/2}} / |xz|^2.
HingeRecord first_variation_check(const Manifold& m, const Point& q, const Point& p,
                                  const Point& x, const Point& z, double k, double r0,
                                  double lambda);

struct HolonomyResult {
  double difference = 0.0;  // |P1 v - P0 v|_g at the common endpoint
  double length0 = 0.0;
  double length1 = 0.0;
  double bound = 0.0;       // C (L0 + L1)^2
  double margin = 0.0;
  double rotation = 0.0;    // signed angle from P0 v to P1 v
};

HolonomyResult holonomy_area_check(const Manifold& m, std::span<const Point> sigma0,
                                   std::span<const Point> sigma1, const TangentVector& v,
                                   double c);

struct BetaAlphaResult {
  double alpha = 0.0;
  double beta = 0.0;
  double ratio = 0.0;  // beta / alpha, 0 when alpha = 0
};

BetaAlphaResult beta_alpha_check(const Manifold& m, const GeodesicPolyline& gamma,
                                 const GeodesicPolyline& gamma1, double tol = 1e-6);

struct SweepOptions {
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  // Curvature bound and radius in units of the model scale (K / scale^2, R * scale).
  double k_unit = 1.0;
  double r_unit = 2.0;
  double c = kDefaultC;
  double shortcut_c = kDefaultShortcutC;
  std::optional<double> tolerance;
};

// Registered ids: hinge, first-variation-ineq, short-median, shortcut, lipexp,
// dir-measure, extension, first-variation, holonomy, beta-alpha.
const std::vector<std::string>& comparison_sweep_ids();
LemmaReport run_comparison_sweep(const std::string& id, const Manifold& m,
                                 const SweepOptions& options);

// Margins of lemma_1var_check along y = exp_x(t u) for the given t values.
std::vector<double> lemma_1var_profile(const Manifold& m, const Point& p, const Point& x,
                                       double theta, std::span<const double> ts,
                                       double c = kDefaultC);

}  // namespace ddrlab
