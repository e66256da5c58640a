#ifndef GFBEAM_UTIL_HPP
#define GFBEAM_UTIL_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>

namespace gfb {

// 10*log10(x), re 1; nonpositive input maps to -inf.
inline double to_db(double linear) {
  if (linear <= 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(linear);
}

inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

// Worker count for data-parallel loops: GFBEAM_WORKERS env var, else hardware.
std::size_t worker_count();

// Runs fn(i) for i in [0, n) on worker_count() threads, contiguous chunks.
// Callers must write disjoint outputs; results are thread-count independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// FNV-1a, used for config hashes in run manifests.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::string hex64(std::uint64_t value);

}  // namespace gfb

#endif
