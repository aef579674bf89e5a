#include "specrank/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace specrank {

int default_thread_count() {
  if (const char* env = std::getenv("SPECRANK_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(long count, const std::function<void(long)>& fn,
                  int threads) {
  if (count <= 0) return;
  if (threads <= 0) threads = default_thread_count();
  if (threads > count) threads = static_cast<int>(count);
  if (threads == 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }

  const long grain = std::max<long>(1, count / (8L * threads));
  std::atomic<long> next{0};
  auto worker = [&] {
    for (;;) {
      const long begin = next.fetch_add(grain);
      if (begin >= count) return;
      const long end = std::min(count, begin + grain);
      for (long i = begin; i < end; ++i) fn(i);
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads) - 1);
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

}  // namespace specrank
