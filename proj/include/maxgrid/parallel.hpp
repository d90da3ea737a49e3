#pragma once

#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace maxgrid {

inline unsigned default_workers() {
  if (const char* env = std::getenv("MAXGRID_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1 && v <= 1024) return static_cast<unsigned>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

// Runs body(begin, end) over contiguous index chunks. Callers must write results
// keyed by index; then the outcome cannot depend on the worker count.
inline void parallel_for(std::size_t n, unsigned workers,
                         const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  if (workers <= 1 || n == 1) {
    body(0, n);
    return;
  }
  const unsigned w = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::vector<std::thread> threads;
  threads.reserve(w);
  std::mutex err_mutex;
  std::exception_ptr err;
  for (unsigned i = 0; i < w; ++i) {
    const std::size_t lo = n * i / w;
    const std::size_t hi = n * (i + 1) / w;
    threads.emplace_back([&, lo, hi] {
      try {
        body(lo, hi);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace maxgrid
