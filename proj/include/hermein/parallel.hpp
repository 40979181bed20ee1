#pragma once

#include <cstdlib>
#include <thread>
#include <vector>

namespace hermein {

/// Worker cap taken from HERMEIN_THREADS. Unset or invalid means 1, which
/// keeps reductions bit-reproducible across runs.
inline int thread_cap() {
  const char* env = std::getenv("HERMEIN_THREADS");
  if (env == nullptr) return 1;
  int v = std::atoi(env);
  if (v < 1) return 1;
  unsigned hw = std::thread::hardware_concurrency();
  if (hw > 0 && v > static_cast<int>(hw)) v = static_cast<int>(hw);
  return v;
}

/// Sums fn(i) for i in [0, count). With k workers the range is split into k
/// contiguous chunks whose partial sums are combined in chunk order, so the
/// result is deterministic for a fixed k. Sum must be value-initializable
/// and support +=.
template <typename Sum, typename Fn>
Sum indexed_sum(std::size_t count, Sum zero, Fn&& fn) {
  const int workers = thread_cap();
  if (workers <= 1 || count < 64) {
    Sum acc = zero;
    for (std::size_t i = 0; i < count; ++i) acc += fn(i);
    return acc;
  }
  std::vector<Sum> partial(static_cast<std::size_t>(workers), zero);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    std::size_t lo = static_cast<std::size_t>(w) * chunk;
    std::size_t hi = lo + chunk < count ? lo + chunk : count;
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi, w] {
      Sum acc = zero;
      for (std::size_t i = lo; i < hi; ++i) acc += fn(i);
      partial[static_cast<std::size_t>(w)] = acc;
    });
  }
  for (auto& t : pool) t.join();
  Sum acc = zero;
  for (const auto& part : partial) acc += part;
  return acc;
}

} // namespace hermein
