#pragma once

#include <cstddef>
#include <functional>

namespace ddrlab {

// Worker count used by the parallel helpers (defaults to 1).
void set_default_jobs(unsigned jobs);
unsigned default_jobs();

// Calls body(k) for k in [0, n), handing indices out to `jobs` worker
// threads. The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  unsigned jobs = 0);

}  // namespace ddrlab
