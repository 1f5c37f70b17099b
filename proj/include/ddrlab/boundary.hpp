#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ddrlab/ddr.hpp"
#include "ddrlab/manifold.hpp"
#include "ddrlab/report.hpp"

namespace ddrlab {

enum class CollarRule { constant_normal, linear_blend };

std::string to_string(CollarRule rule);
CollarRule parse_collar_rule(const std::string& name);

// Core grid with collar rows added beyond all four edges of its rectangle.
class CollaredManifold {
 public:
  const Manifold& core() const { return core_; }
  const Manifold& extended() const { return extended_; }
  double depth() const { return depth_; }
  std::size_t collar_nodes() const { return pad_; }  // node rows per side
  CollarRule rule() const { return rule_; }
  // weight of the identity at row k = 1..collar_nodes (0 for constant-normal)
  const std::vector<double>& profile() const { return profile_; }
  double seam_jump() const { return seam_jump_; }          // max node-to-node jump touching the collar
  double interior_jump() const { return interior_jump_; }  // max node-to-node jump inside the core

  bool in_core(const Point& p, double tol = 1e-12) const;

 private:
  friend CollaredManifold attach_collar(const Manifold& core, double depth, CollarRule rule);
  CollaredManifold(Manifold core, Manifold extended)
      : core_(std::move(core)), extended_(std::move(extended)) {}

  Manifold core_;
  Manifold extended_;
  double depth_ = 0.0;
  std::size_t pad_ = 0;
  CollarRule rule_ = CollarRule::constant_normal;
  std::vector<double> profile_;
  double seam_jump_ = 0.0;
  double interior_jump_ = 0.0;
};

// depth >= 4h. Core tensors are copied bitwise. Collar tensors: constant-normal
// copies the nearest boundary node; linear-blend uses (1 - t/D) g_boundary + (t/D) I
// with t the chart distance to the core rectangle (clamped at D).
CollaredManifold attach_collar(const Manifold& core, double depth, CollarRule rule);

// Stations on the core boundary: every boundary node when count == 0,
// otherwise `count` points equally spaced by arc length after a seeded offset.
ObservationSample sample_boundary(const Manifold& core, std::size_t count = 0, std::uint64_t seed = 0);

// Points of the collar band (boundary included) for the extended sample.
ObservationSample sample_collar(const CollaredManifold& cm, std::size_t count, std::uint64_t seed);

bool on_core_boundary(const Manifold& core, const Point& p, double tol = 1e-9);

// Distances restricted to the core (walls absorb), matrix as in ddr_of_point.
DdrMatrix boundary_ddr(const Manifold& core, const ObservationSample& stations, const Point& x);

DdrDataset boundary_dataset(const Manifold& core, const ObservationSample& stations,
                            std::span<const Point> xs, unsigned jobs = 0);

// margin = ||D_F(x) - D_F(y)|| (core) - ||D_Ftilde(x) - D_Ftilde(y)|| (extended),
// tolerance 5 eps_h.
HingeRecord collar_monotonicity_check(const CollaredManifold& cm, const ObservationSample& stations,
                                      const ObservationSample& collar_sample, const Point& x,
                                      const Point& y);

// All pairwise sup-distances of a boundary dataset must be positive; identical
// sources are counted as duplicates, not failures. Fits c0 as fit_bilip_lower.
LemmaReport boundary_invertibility_check(const DdrDataset& ds, const DistanceOracle& oracle);

}  // namespace ddrlab
