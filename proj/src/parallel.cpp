#include "occflow/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace occflow {

namespace {
int g_threads = 0;  // 0 = unresolved

int resolve_threads() {
  if (const char* env = std::getenv("OCCFLOW_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}
}  // namespace

int num_threads() {
  if (g_threads == 0) g_threads = resolve_threads();
  return g_threads;
}

void set_num_threads(int n) { g_threads = n >= 1 ? n : 1; }

void parallel_rows(int height, const std::function<void(int)>& fn) {
  int workers = num_threads();
  if (workers <= 1 || height <= 1) {
    for (int y = 0; y < height; ++y) fn(y);
    return;
  }
  if (workers > height) workers = height;
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        int y = next.fetch_add(1);
        if (y >= height) break;
        fn(y);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace occflow
