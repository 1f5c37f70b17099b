#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ddrlab/manifold.hpp"

namespace ddrlab {

enum class EikonalBackend : std::uint8_t { fast_marching = 0, dijkstra = 1 };

std::string to_string(EikonalBackend backend);

// accepted: regular node. boundary_affected: node on the outer ring of the
// grid, where the walls of the domain bound the paths and one-sided
// differences are all that is available.
enum class NodeStatus : std::uint8_t { accepted = 0, boundary_affected = 1 };

struct SolveOptions {
  // Unset: fast marching for conformal grids, stencil Dijkstra otherwise.
  std::optional<EikonalBackend> backend;
  // Dijkstra stencil: all primitive offsets with max(|di|, |dj|) <= radius
  // (1 -> 8 neighbors, 2 -> 16 neighbors).
  int stencil_radius = 2;
};

class DistanceField {
 public:
  DistanceField(std::shared_ptr<const GridMetric> grid, Point source, EikonalBackend backend,
                int stencil_radius, std::vector<double> values, std::vector<NodeStatus> status,
                double tolerance);

  const Point& source() const { return source_; }
  const GridMetric& grid() const { return *grid_; }
  const std::shared_ptr<const GridMetric>& grid_ptr() const { return grid_; }
  EikonalBackend backend() const { return backend_; }
  int stencil_radius() const { return stencil_radius_; }

  const std::vector<double>& values() const { return values_; }
  const std::vector<NodeStatus>& status() const { return status_; }
  double value(std::size_t i, std::size_t j) const { return values_[grid_->index(i, j)]; }
  double max_value() const;

  // Recorded solver tolerance (epsilon_h) and eikonal residual (rho).
  double tolerance() const { return tolerance_; }
  double residual() const { return residual_; }

 private:
  std::shared_ptr<const GridMetric> grid_;
  Point source_;
  EikonalBackend backend_;
  int stencil_radius_;
  std::vector<double> values_;
  std::vector<NodeStatus> status_;
  double tolerance_;
  double residual_;
};

DistanceField solve_distance_field(const Manifold& m, const Point& source,
                                   const SolveOptions& options = {});

// Bilinear interpolation of node values.
double eval_distance(const DistanceField& field, const Point& p);

// Exact distance for analytic kinds, cached field from x for grids.
double distance(const Manifold& m, const Point& x, const Point& y);

// Riemannian gradient g^{-1} dd at p from centered differences of the
// interpolated field.
TangentVector grad_distance(const DistanceField& field, const Point& p);

// Max of | |grad d|_g - 1 | over interior nodes away from the source.
double residual_check(const DistanceField& field);

// Nodes closer than this (chart length) to the source are excluded from
// the residual.
double residual_exclusion_radius(const GridMetric& grid);

// epsilon_h for a grid: identity-metric calibration error on a grid of the
// same shape, scaled by sqrt(lambda_max); Dijkstra adds the stencil
// anisotropy bound.
double solver_tolerance(const GridMetric& grid, EikonalBackend backend, int stencil_radius = 2);
EikonalBackend default_backend(const GridMetric& grid);

// Relative overestimate of straight-segment stencil paths for a metric with
// condition number lambda_max / lambda_min.
double stencil_anisotropy_bound(int stencil_radius, double lambda_min, double lambda_max);

struct CacheEntryInfo {
  std::filesystem::path path;
  std::uint64_t grid_hash = 0;
  std::size_t nx = 0;
  std::size_t ny = 0;
  Point source = Point::Zero();
  double tolerance = 0.0;
  std::uintmax_t bytes = 0;
};

// Thread-safe memoization of distance fields keyed by (grid hash, source,
// backend, stencil). Optionally persisted, one file per field.
class FieldCache {
 public:
  explicit FieldCache(std::size_t memory_capacity = 512);

  // Process-wide cache; disk root taken from DDRLAB_CACHE_DIR when set.
  static FieldCache& global();

  void set_directory(std::optional<std::filesystem::path> dir);
  std::optional<std::filesystem::path> directory() const;

  std::shared_ptr<const DistanceField> get(const Manifold& m, const Point& source,
                                           const SolveOptions& options = {});

  std::size_t memory_size() const;
  std::uint64_t hits() const;
  std::uint64_t misses() const;
  void clear_memory();

  std::vector<CacheEntryInfo> list_disk() const;
  std::size_t clear_disk();

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

// Binary field file: header + row-major float64 values + status bytes.
void write_field_file(const std::filesystem::path& path, const DistanceField& field);
std::optional<DistanceField> read_field_file(const std::filesystem::path& path,
                                             const std::shared_ptr<const GridMetric>& grid);
std::optional<CacheEntryInfo> read_field_header(const std::filesystem::path& path);

}  // namespace ddrlab
