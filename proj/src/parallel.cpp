#include <ddr/parallel.hpp>

#include <atomic>
#include <stdexcept>

namespace ddr {

namespace {
std::atomic<int> g_threads{1};
}

int thread_count() { return g_threads.load(); }

void set_thread_count(int n)
{
  if (n < 1) throw std::invalid_argument("thread count must be >= 1");
  g_threads.store(n);
}

}  // namespace ddr
