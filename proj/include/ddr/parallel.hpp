// Static-partition parallel loop. Each index is processed exactly once and
// callers write into per-index slots, so results do not depend on the thread
// count.

#ifndef DDR_PARALLEL_HPP
#define DDR_PARALLEL_HPP

#include <algorithm>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ddr {

/// Number of worker threads used by library loops (default 1).
int thread_count();
void set_thread_count(int n);

template <typename F>
void parallel_for(int n, F&& body)
{
  const int nthreads = std::min(thread_count(), n);
  if (nthreads <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t) {
    workers.emplace_back([&, t] {
      const int begin = static_cast<int>(static_cast<long>(n) * t / nthreads);
      const int end = static_cast<int>(static_cast<long>(n) * (t + 1) / nthreads);
      try {
        for (int i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace ddr

#endif
