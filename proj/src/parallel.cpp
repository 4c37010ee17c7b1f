#include "mftg/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>

namespace mftg {

int worker_count() {
  if (const char* env = std::getenv("MFTG_WORKERS")) {
    try {
      const int w = std::stoi(env);
      if (w >= 1) return w;
    } catch (...) {
    }
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

namespace detail {

void run_chunks(int num_chunks, const std::function<void(int)>& run_one) {
  const int workers = std::min(worker_count(), num_chunks);
  if (workers <= 1) {
    for (int c = 0; c < num_chunks; ++c) run_one(c);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int c = next.fetch_add(1);
        if (c >= num_chunks) break;
        run_one(c);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail

}  // namespace mftg
