// parallel.hpp
// Deterministic chunked parallel-for and counter-based random streams.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

namespace qew {

/// Runs fn(i) for i in [0, count) over `workers` threads in contiguous chunks.
/// fn must write only to slots owned by index i, so the result does not
/// depend on the worker count. The first exception thrown is rethrown.
template <typename Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  if (workers <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// SplitMix64 generator keyed by (seed, index, stream), so every sample or
/// round owns an independent, reproducible stream.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  constexpr CounterRng(std::uint64_t seed, std::uint64_t index, std::uint64_t stream = 0)
      : state_(mix64(mix64(seed ^ 0x5851f42d4c957f2dULL) ^ mix64(index + 0x14057b7ef767814fULL) ^
                     (stream * 0x9e3779b97f4a7c15ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  constexpr double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Fair bit.
  constexpr int bit() { return static_cast<int>((*this)() >> 63); }

 private:
  std::uint64_t state_;
};

}  // namespace qew
