#ifndef DISPATCH_PARALLEL_HPP
#define DISPATCH_PARALLEL_HPP

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dispatch {

// Static block partition of [0, n) over worker threads. Each index is touched
// by exactly one worker, so results do not depend on the thread count as long
// as fn(i) writes only to slot i.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (n == 0) return;
  unsigned hw = threads > 0 ? threads : std::thread::hardware_concurrency();
  if (hw <= 1 || n < 2 * hw) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr err;
  std::mutex err_mutex;
  std::vector<std::thread> pool;
  pool.reserve(hw);
  std::size_t chunk = (n + hw - 1) / hw;
  for (unsigned w = 0; w < hw; ++w) {
    std::size_t lo = w * chunk;
    std::size_t hi = lo + chunk < n ? lo + chunk : n;
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace dispatch

#endif
