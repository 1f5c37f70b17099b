#include "ddrlab/eikonal.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <queue>
#include <shared_mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include <Eigen/LU>

#include "ddrlab/errors.hpp"

namespace ddrlab {

namespace fs = std::filesystem;

std::string to_string(EikonalBackend backend) {
  return backend == EikonalBackend::fast_marching ? "fast-marching" : "dijkstra";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct HeapItem {
  double value;
  std::size_t node;
  bool operator>(const HeapItem& o) const {
    return value > o.value || (value == o.value && node > o.node);
  }
};
using MinHeap = std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<>>;

// Lower-left node of the cell containing p (clamped).
std::pair<std::size_t, std::size_t> containing_cell(const GridMetric& g, const Point& p) {
  const Point u = (p - g.origin()) / g.spacing();
  const long i = std::clamp(static_cast<long>(std::floor(u.x())), 0L, static_cast<long>(g.nx()) - 2);
  const long j = std::clamp(static_cast<long>(std::floor(u.y())), 0L, static_cast<long>(g.ny()) - 2);
  return {static_cast<std::size_t>(i), static_cast<std::size_t>(j)};
}

// g-length of the straight chart segment p -> q (3-point Gauss, bilinear tensor).
double segment_length(const GridMetric& g, const Point& p, const Point& q) {
  static constexpr double kNodes[3] = {0.5 - 0.3872983346207417, 0.5, 0.5 + 0.3872983346207417};
  static constexpr double kWeights[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  const Vec2 d = q - p;
  double len = 0.0;
  for (int k = 0; k < 3; ++k) {
    const Mat2 t = g.bilinear_at(p + kNodes[k] * d);
    len += kWeights[k] * std::sqrt(d.dot(t * d));
  }
  return len;
}

std::vector<std::pair<int, int>> stencil_offsets(int radius) {
  std::vector<std::pair<int, int>> out;
  for (int dj = -radius; dj <= radius; ++dj) {
    for (int di = -radius; di <= radius; ++di) {
      if (di == 0 && dj == 0) continue;
      if (std::gcd(std::abs(di), std::abs(dj)) != 1) continue;
      out.emplace_back(di, dj);
    }
  }
  return out;
}

double max_stencil_gap(int radius) {
  std::vector<double> angles;
  for (auto [di, dj] : stencil_offsets(radius)) angles.push_back(std::atan2(dj, di));
  std::sort(angles.begin(), angles.end());
  double gap = angles.front() + 2.0 * std::numbers::pi - angles.back();
  for (std::size_t k = 1; k < angles.size(); ++k) gap = std::max(gap, angles[k] - angles[k - 1]);
  return gap;
}

std::vector<NodeStatus> ring_status(const GridMetric& g) {
  std::vector<NodeStatus> status(g.size(), NodeStatus::accepted);
  for (std::size_t j = 0; j < g.ny(); ++j) {
    for (std::size_t i = 0; i < g.nx(); ++i) {
      if (i == 0 || j == 0 || i + 1 == g.nx() || j + 1 == g.ny()) {
        status[g.index(i, j)] = NodeStatus::boundary_affected;
      }
    }
  }
  return status;
}

std::vector<double> fast_marching(const GridMetric& g, const Point& source) {
  const std::size_t nx = g.nx(), ny = g.ny();
  const double h = g.spacing();
  std::vector<double> u(g.size(), kInf);
  std::vector<char> known(g.size(), 0);
  std::vector<double> slowness(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) slowness[k] = std::sqrt(g.tensors()[k](0, 0));
  MinHeap heap;

  const double c_src = std::sqrt(g.bilinear_at(source)(0, 0));
  const auto [ci, cj] = containing_cell(g, source);
  for (std::size_t j = cj; j <= cj + 1; ++j) {
    for (std::size_t i = ci; i <= ci + 1; ++i) {
      const std::size_t k = g.index(i, j);
      u[k] = (g.node(i, j) - source).norm() * 0.5 * (c_src + slowness[k]);
      heap.push({u[k], k});
    }
  }

  auto update = [&](std::size_t i, std::size_t j) {
    const std::size_t k = g.index(i, j);
    double a = kInf, b = kInf;
    if (i > 0 && known[k - 1]) a = u[k - 1];
    if (i + 1 < nx && known[k + 1]) a = std::min(a, u[k + 1]);
    if (j > 0 && known[k - nx]) b = u[k - nx];
    if (j + 1 < ny && known[k + nx]) b = std::min(b, u[k + nx]);
    const double f = h * slowness[k];
    double v;
    if (std::abs(a - b) >= f || !std::isfinite(a) || !std::isfinite(b)) {
      v = std::min(a, b) + f;
    } else {
      v = 0.5 * (a + b + std::sqrt(2.0 * f * f - (a - b) * (a - b)));
    }
    if (v < u[k]) {
      u[k] = v;
      heap.push({v, k});
    }
  };

  while (!heap.empty()) {
    const HeapItem top = heap.top();
    heap.pop();
    if (known[top.node] || top.value > u[top.node]) continue;
    known[top.node] = 1;
    const std::size_t i = top.node % nx, j = top.node / nx;
    if (i > 0 && !known[top.node - 1]) update(i - 1, j);
    if (i + 1 < nx && !known[top.node + 1]) update(i + 1, j);
    if (j > 0 && !known[top.node - nx]) update(i, j - 1);
    if (j + 1 < ny && !known[top.node + nx]) update(i, j + 1);
  }
  return u;
}

std::vector<double> stencil_dijkstra(const GridMetric& g, const Point& source, int radius) {
  const long nx = static_cast<long>(g.nx()), ny = static_cast<long>(g.ny());
  std::vector<double> u(g.size(), kInf);
  std::vector<char> done(g.size(), 0);
  MinHeap heap;
  const auto offsets = stencil_offsets(radius);

  const auto [ci, cj] = containing_cell(g, source);
  for (long j = static_cast<long>(cj) - radius + 1; j <= static_cast<long>(cj) + radius; ++j) {
    for (long i = static_cast<long>(ci) - radius + 1; i <= static_cast<long>(ci) + radius; ++i) {
      if (i < 0 || j < 0 || i >= nx || j >= ny) continue;
      const auto si = static_cast<std::size_t>(i), sj = static_cast<std::size_t>(j);
      const std::size_t k = g.index(si, sj);
      u[k] = segment_length(g, source, g.node(si, sj));
      heap.push({u[k], k});
    }
  }

  while (!heap.empty()) {
    const HeapItem top = heap.top();
    heap.pop();
    if (done[top.node] || top.value > u[top.node]) continue;
    done[top.node] = 1;
    const long i = static_cast<long>(top.node) % nx, j = static_cast<long>(top.node) / nx;
    const Point p = g.node(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    for (auto [di, dj] : offsets) {
      const long a = i + di, b = j + dj;
      if (a < 0 || b < 0 || a >= nx || b >= ny) continue;
      const std::size_t k = g.index(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
      if (done[k]) continue;
      const double v =
          top.value +
          segment_length(g, p, g.node(static_cast<std::size_t>(a), static_cast<std::size_t>(b)));
      if (v < u[k]) {
        u[k] = v;
        heap.push({v, k});
      }
    }
  }
  return u;
}

std::vector<double> solve_raw(const GridMetric& g, const Point& source, EikonalBackend backend,
                              int radius) {
  return backend == EikonalBackend::fast_marching ? fast_marching(g, source)
                                                  : stencil_dijkstra(g, source, radius);
}

double bilinear_value(const GridMetric& g, const std::vector<double>& values, const Point& p) {
  const Point u = (p - g.origin()) / g.spacing();
  const auto [i, j] = containing_cell(g, p);
  const double tx = u.x() - static_cast<double>(i);
  const double ty = u.y() - static_cast<double>(j);
  const std::size_t k = g.index(i, j);
  const std::size_t nx = g.nx();
  return (1 - tx) * (1 - ty) * values[k] + tx * (1 - ty) * values[k + 1] +
         (1 - tx) * ty * values[k + nx] + tx * ty * values[k + nx + 1];
}

// Max error of the solver on the identity metric for a grid of this shape,
// at nodes and at cell centers, over two source placements.
double calibration_error(std::size_t nx, std::size_t ny, double h, EikonalBackend backend,
                         int radius) {
  using Key = std::tuple<std::size_t, std::size_t, std::uint64_t, int, int>;
  static std::mutex mu;
  static std::map<Key, double> memo;
  const Key key{nx, ny, std::bit_cast<std::uint64_t>(h), static_cast<int>(backend), radius};
  {
    std::lock_guard lock(mu);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
  }
  const GridMetric g(Point::Zero(), h, nx, ny, std::vector<Mat2>(nx * ny, Mat2::Identity()));
  const Point extent = g.domain().hi;
  const Point sources[2] = {0.5 * extent, Point(0.31 * extent.x(), 0.57 * extent.y())};
  double err = 0.0;
  for (const Point& s : sources) {
    const auto u = solve_raw(g, s, backend, radius);
    for (std::size_t j = 0; j < ny; ++j) {
      for (std::size_t i = 0; i < nx; ++i) {
        err = std::max(err, std::abs(u[g.index(i, j)] - (g.node(i, j) - s).norm()));
        if (i + 1 < nx && j + 1 < ny) {
          const Point c = g.node(i, j) + Point(0.5 * h, 0.5 * h);
          err = std::max(err, std::abs(bilinear_value(g, u, c) - (c - s).norm()));
        }
      }
    }
  }
  std::lock_guard lock(mu);
  memo.emplace(key, err);
  return err;
}

}  // namespace

double stencil_anisotropy_bound(int stencil_radius, double lambda_min, double lambda_max) {
  if (stencil_radius < 1) throw InvalidArgument("stencil radius must be at least 1");
  const double gap = max_stencil_gap(stencil_radius);
  const double kappa = std::sqrt(lambda_max / lambda_min);
  const double gap_g = std::min(2.0 * std::atan(kappa * std::tan(0.5 * gap)), 0.999 * std::numbers::pi);
  return 1.0 / std::cos(0.5 * gap_g) - 1.0;
}

EikonalBackend default_backend(const GridMetric& grid) {
  return grid.conformal() ? EikonalBackend::fast_marching : EikonalBackend::dijkstra;
}

double solver_tolerance(const GridMetric& grid, EikonalBackend backend, int stencil_radius) {
  const double root = std::sqrt(grid.lambda_max());
  double eps = calibration_error(grid.nx(), grid.ny(), grid.spacing(), backend, stencil_radius) * root;
  if (backend == EikonalBackend::dijkstra && grid.lambda_max() > grid.lambda_min() * (1 + 1e-12)) {
    const Rect d = grid.domain();
    const double diag = std::hypot(d.width(), d.height()) * root;
    eps += (stencil_anisotropy_bound(stencil_radius, grid.lambda_min(), grid.lambda_max()) -
            stencil_anisotropy_bound(stencil_radius, 1.0, 1.0)) *
           diag;
  }
  return eps;
}

double residual_exclusion_radius(const GridMetric& grid) {
  const Rect d = grid.domain();
  return std::max(6.0 * grid.spacing(), 0.1 * std::min(d.width(), d.height()));
}

// ---- DistanceField -------------------------------------------------------------

DistanceField::DistanceField(std::shared_ptr<const GridMetric> grid, Point source,
                             EikonalBackend backend, int stencil_radius, std::vector<double> values,
                             std::vector<NodeStatus> status, double tolerance)
    : grid_(std::move(grid)),
      source_(std::move(source)),
      backend_(backend),
      stencil_radius_(stencil_radius),
      values_(std::move(values)),
      status_(std::move(status)),
      tolerance_(tolerance),
      residual_(0.0) {
  if (values_.size() != grid_->size() || status_.size() != grid_->size()) {
    throw InvalidArgument("distance field size does not match the grid");
  }
  residual_ = residual_check(*this);
}

double DistanceField::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

DistanceField solve_distance_field(const Manifold& m, const Point& source,
                                   const SolveOptions& options) {
  if (m.analytic()) throw WrongManifoldKind("solve_distance_field: manifold is not a grid");
  m.require_contains(source, "solve_distance_field");
  const GridMetric& g = m.grid();
  const EikonalBackend backend = options.backend.value_or(default_backend(g));
  if (backend == EikonalBackend::fast_marching && !g.conformal()) {
    throw InvalidArgument("fast marching requires a conformal metric");
  }
  auto values = solve_raw(g, source, backend, options.stencil_radius);
  return DistanceField(m.grid_ptr(), source, backend, options.stencil_radius, std::move(values),
                       ring_status(g), solver_tolerance(g, backend, options.stencil_radius));
}

double eval_distance(const DistanceField& field, const Point& p) {
  const GridMetric& g = field.grid();
  if (!g.contains(p)) {
    std::ostringstream os;
    os << "eval_distance: point (" << p.x() << ", " << p.y() << ") outside the grid domain";
    throw OutsideDomain(os.str());
  }
  return bilinear_value(g, field.values(), p);
}

double distance(const Manifold& m, const Point& x, const Point& y) {
  if (m.analytic()) return exact_distance(m, x, y);
  m.require_contains(y, "distance");
  if (x == y) return 0.0;
  return eval_distance(*FieldCache::global().get(m, x), y);
}

TangentVector grad_distance(const DistanceField& field, const Point& p) {
  const GridMetric& g = field.grid();
  const double h = g.spacing();
  const Rect d = g.domain();
  if (!d.contains(p) || p.x() - h < d.lo.x() || p.x() + h > d.hi.x() || p.y() - h < d.lo.y() ||
      p.y() + h > d.hi.y()) {
    throw OutsideDomain("grad_distance: point too close to the grid boundary");
  }
  if ((p - field.source()).norm() <= 3.0 * h) {
    throw InvalidArgument("grad_distance: point within 3h of the source");
  }
  const Vec2 dx(h, 0.0), dy(0.0, h);
  const auto& v = field.values();
  const Vec2 e((bilinear_value(g, v, p + dx) - bilinear_value(g, v, p - dx)) / (2 * h),
               (bilinear_value(g, v, p + dy) - bilinear_value(g, v, p - dy)) / (2 * h));
  return {p, g.metric_at(p).inverse() * e};
}

double residual_check(const DistanceField& field) {
  const GridMetric& g = field.grid();
  const double h = g.spacing();
  const double r_ex = residual_exclusion_radius(g);
  const auto& v = field.values();
  double worst = 0.0;
  for (std::size_t j = 1; j + 1 < g.ny(); ++j) {
    for (std::size_t i = 1; i + 1 < g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      if (field.status()[k] != NodeStatus::accepted) continue;
      if ((g.node(i, j) - field.source()).norm() < r_ex) continue;
      const Vec2 e((v[k + 1] - v[k - 1]) / (2 * h), (v[k + g.nx()] - v[k - g.nx()]) / (2 * h));
      const double n = std::sqrt(e.dot(g.tensor(i, j).inverse() * e));
      worst = std::max(worst, std::abs(n - 1.0));
    }
  }
  return worst;
}

// ---- field files -----------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'D', 'D', 'R', 'F'};
constexpr std::uint32_t kVersion = 1;

struct Header {
  std::uint64_t grid_hash = 0;
  std::uint64_t nx = 0, ny = 0;
  std::uint64_t src_i = 0, src_j = 0;
  double src_x = 0, src_y = 0;
  double h = 0, tolerance = 0, residual = 0;
  std::uint8_t backend = 0, stencil = 0;
};

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
bool get(std::istream& is, T& v) {
  return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), sizeof(T)));
}

bool read_header(std::istream& is, Header& hd) {
  char magic[4];
  std::uint32_t version = 0;
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) return false;
  if (!get(is, version) || version != kVersion) return false;
  return get(is, hd.grid_hash) && get(is, hd.nx) && get(is, hd.ny) && get(is, hd.src_i) &&
         get(is, hd.src_j) && get(is, hd.src_x) && get(is, hd.src_y) && get(is, hd.h) &&
         get(is, hd.tolerance) && get(is, hd.residual) && get(is, hd.backend) &&
         get(is, hd.stencil);
}

}  // namespace

void write_field_file(const fs::path& path, const DistanceField& field) {
  const GridMetric& g = field.grid();
  const std::size_t node = g.nearest_node(field.source());
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot write cache file " + tmp.string());
    os.write(kMagic, 4);
    put(os, kVersion);
    put(os, g.hash());
    put(os, static_cast<std::uint64_t>(g.nx()));
    put(os, static_cast<std::uint64_t>(g.ny()));
    put(os, static_cast<std::uint64_t>(node % g.nx()));
    put(os, static_cast<std::uint64_t>(node / g.nx()));
    put(os, field.source().x());
    put(os, field.source().y());
    put(os, g.spacing());
    put(os, field.tolerance());
    put(os, field.residual());
    put(os, static_cast<std::uint8_t>(field.backend()));
    put(os, static_cast<std::uint8_t>(field.stencil_radius()));
    os.write(reinterpret_cast<const char*>(field.values().data()),
             static_cast<std::streamsize>(sizeof(double) * field.values().size()));
    os.write(reinterpret_cast<const char*>(field.status().data()),
             static_cast<std::streamsize>(field.status().size()));
    if (!os) throw Error("failed writing cache file " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::optional<CacheEntryInfo> read_field_header(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  Header hd;
  if (!is || !read_header(is, hd)) return std::nullopt;
  CacheEntryInfo info;
  info.path = path;
  info.grid_hash = hd.grid_hash;
  info.nx = hd.nx;
  info.ny = hd.ny;
  info.source = Point(hd.src_x, hd.src_y);
  info.tolerance = hd.tolerance;
  std::error_code ec;
  info.bytes = fs::file_size(path, ec);
  return info;
}

std::optional<DistanceField> read_field_file(const fs::path& path,
                                             const std::shared_ptr<const GridMetric>& grid) {
  std::ifstream is(path, std::ios::binary);
  Header hd;
  if (!is || !read_header(is, hd)) return std::nullopt;
  if (hd.grid_hash != grid->hash() || hd.nx != grid->nx() || hd.ny != grid->ny() ||
      hd.h != grid->spacing()) {
    return std::nullopt;
  }
  std::vector<double> values(grid->size());
  std::vector<NodeStatus> status(grid->size());
  if (!is.read(reinterpret_cast<char*>(values.data()),
               static_cast<std::streamsize>(sizeof(double) * values.size())) ||
      !is.read(reinterpret_cast<char*>(status.data()), static_cast<std::streamsize>(status.size()))) {
    return std::nullopt;
  }
  return DistanceField(grid, Point(hd.src_x, hd.src_y), static_cast<EikonalBackend>(hd.backend),
                       hd.stencil, std::move(values), std::move(status), hd.tolerance);
}

// ---- FieldCache ------------------------------------------------------------------

struct FieldCache::Impl {
  using Key = std::tuple<std::uint64_t, std::uint64_t, std::uint64_t, int, int>;

  std::size_t capacity;
  mutable std::shared_mutex mu;
  std::map<Key, std::shared_ptr<const DistanceField>> fields;
  std::deque<Key> order;
  std::optional<fs::path> dir;
  std::atomic<std::uint64_t> hits{0};
  std::atomic<std::uint64_t> misses{0};

  fs::path file_for(const Key& key) const {
    char name[96];
    const std::uint64_t parts[4] = {std::get<1>(key), std::get<2>(key),
                                    static_cast<std::uint64_t>(std::get<3>(key)),
                                    static_cast<std::uint64_t>(std::get<4>(key))};
    const std::uint64_t sub = fnv1a(parts, sizeof(parts));
    std::snprintf(name, sizeof(name), "field-%016llx-%016llx.bin",
                  static_cast<unsigned long long>(std::get<0>(key)),
                  static_cast<unsigned long long>(sub));
    return *dir / name;
  }
};

FieldCache::FieldCache(std::size_t memory_capacity) : impl_(std::make_shared<Impl>()) {
  impl_->capacity = std::max<std::size_t>(1, memory_capacity);
}

FieldCache& FieldCache::global() {
  static FieldCache cache = [] {
    FieldCache c;
    if (const char* env = std::getenv("DDRLAB_CACHE_DIR"); env && *env) c.set_directory(fs::path(env));
    return c;
  }();
  return cache;
}

void FieldCache::set_directory(std::optional<fs::path> dir) {
  std::unique_lock lock(impl_->mu);
  impl_->dir = std::move(dir);
}

std::optional<fs::path> FieldCache::directory() const {
  std::shared_lock lock(impl_->mu);
  return impl_->dir;
}

std::shared_ptr<const DistanceField> FieldCache::get(const Manifold& m, const Point& source,
                                                     const SolveOptions& options) {
  if (m.analytic()) throw WrongManifoldKind("FieldCache: manifold is not a grid");
  const GridMetric& g = m.grid();
  const EikonalBackend backend = options.backend.value_or(default_backend(g));
  const Impl::Key key{g.hash(), std::bit_cast<std::uint64_t>(source.x()),
                      std::bit_cast<std::uint64_t>(source.y()), static_cast<int>(backend),
                      backend == EikonalBackend::dijkstra ? options.stencil_radius : 0};
  std::optional<fs::path> file;
  {
    std::shared_lock lock(impl_->mu);
    if (auto it = impl_->fields.find(key); it != impl_->fields.end()) {
      ++impl_->hits;
      return it->second;
    }
    if (impl_->dir) file = impl_->file_for(key);
  }
  ++impl_->misses;

  std::shared_ptr<const DistanceField> field;
  if (file && fs::exists(*file)) {
    if (auto loaded = read_field_file(*file, m.grid_ptr());
        loaded && loaded->source() == source && loaded->backend() == backend) {
      field = std::make_shared<const DistanceField>(std::move(*loaded));
    }
  }
  if (!field) {
    SolveOptions opts = options;
    opts.backend = backend;
    field = std::make_shared<const DistanceField>(solve_distance_field(m, source, opts));
    if (file) write_field_file(*file, *field);
  }

  std::unique_lock lock(impl_->mu);
  auto [it, inserted] = impl_->fields.emplace(key, field);
  if (inserted) {
    impl_->order.push_back(key);
    while (impl_->order.size() > impl_->capacity) {
      impl_->fields.erase(impl_->order.front());
      impl_->order.pop_front();
    }
  }
  return it->second;
}

std::size_t FieldCache::memory_size() const {
  std::shared_lock lock(impl_->mu);
  return impl_->fields.size();
}

std::uint64_t FieldCache::hits() const { return impl_->hits; }
std::uint64_t FieldCache::misses() const { return impl_->misses; }

void FieldCache::clear_memory() {
  std::unique_lock lock(impl_->mu);
  impl_->fields.clear();
  impl_->order.clear();
}

std::vector<CacheEntryInfo> FieldCache::list_disk() const {
  std::vector<CacheEntryInfo> out;
  const auto dir = directory();
  if (!dir || !fs::is_directory(*dir)) return out;
  for (const auto& entry : fs::directory_iterator(*dir)) {
    if (entry.path().extension() != ".bin") continue;
    if (auto info = read_field_header(entry.path())) out.push_back(*info);
  }
  std::sort(out.begin(), out.end(),
            [](const CacheEntryInfo& a, const CacheEntryInfo& b) { return a.path < b.path; });
  return out;
}

std::size_t FieldCache::clear_disk() {
  std::size_t removed = 0;
  const auto dir = directory();
  if (!dir || !fs::is_directory(*dir)) return 0;
  for (const auto& entry : fs::directory_iterator(*dir)) {
    const auto name = entry.path().filename().string();
    if (name.starts_with("field-") && entry.path().extension() == ".bin") {
      fs::remove(entry.path());
      ++removed;
    }
  }
  return removed;
}

}  // namespace ddrlab
