#include "ssx/threads.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace ssx {

namespace {

int initial_threads() {
  if (const char* env = std::getenv("SSX_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

std::atomic<int>& thread_setting() {
  static std::atomic<int> n{initial_threads()};
  return n;
}

}  // namespace

int num_threads() { return thread_setting().load(); }

void set_num_threads(int n) { thread_setting().store(n < 1 ? 1 : n); }

void parallel_for(int64_t n,
                  const std::function<void(int64_t, int64_t)>& fn) {
  if (n <= 0) return;
  int workers = num_threads();
  if (workers > n) workers = static_cast<int>(n);
  if (workers <= 1) {
    fn(0, n);
    return;
  }
  int64_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    int64_t begin = w * chunk;
    int64_t end = begin + chunk < n ? begin + chunk : n;
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace ssx
