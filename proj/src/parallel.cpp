#include "ddrlab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ddrlab {

namespace {
std::atomic<unsigned> g_jobs{1};
}

void set_default_jobs(unsigned jobs) { g_jobs = std::max(1u, jobs); }
unsigned default_jobs() { return g_jobs; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, unsigned jobs) {
  if (jobs == 0) jobs = default_jobs();
  const std::size_t workers = std::min<std::size_t>(jobs, n);
  if (workers <= 1) {
    for (std::size_t k = 0; k < n; ++k) body(k);
    return;
  }
  std::exception_ptr first;
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= n) return;
      try {
        body(k);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first) first = std::current_exception();
        next = n;
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  pool.clear();
  if (first) std::rethrow_exception(first);
}

}  // namespace ddrlab
