#include "objf/common/parallel.hpp"

#include <atomic>
#include <chrono>
#include <thread>

namespace objf {

int hardware_threads() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

int resolve_threads(int requested) {
  if (requested <= 0) return hardware_threads();
  return requested;
}

void parallel_for_chunks(int64_t n, int num_chunks, int num_threads,
                         const std::function<void(int, int64_t, int64_t)>& fn) {
  if (n <= 0 || num_chunks <= 0) return;
  if (num_chunks > n) num_chunks = static_cast<int>(n);
  num_threads = resolve_threads(num_threads);

  auto chunk_range = [&](int c, int64_t& begin, int64_t& end) {
    // Same split for any thread count: ceil-balanced contiguous ranges.
    int64_t base = n / num_chunks;
    int64_t rem = n % num_chunks;
    begin = c * base + std::min<int64_t>(c, rem);
    end = begin + base + (c < rem ? 1 : 0);
  };

  if (num_threads == 1 || num_chunks == 1) {
    for (int c = 0; c < num_chunks; ++c) {
      int64_t b, e;
      chunk_range(c, b, e);
      fn(c, b, e);
    }
    return;
  }

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      int c = next.fetch_add(1);
      if (c >= num_chunks) return;
      int64_t b, e;
      chunk_range(c, b, e);
      fn(c, b, e);
    }
  };

  std::vector<std::thread> pool;
  int spawn = std::min(num_threads, num_chunks) - 1;
  pool.reserve(spawn);
  for (int i = 0; i < spawn; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

void parallel_for(int64_t n, int num_threads, const std::function<void(int64_t)>& fn) {
  num_threads = resolve_threads(num_threads);
  int chunks = std::max(1, num_threads * 4);
  parallel_for_chunks(n, chunks, num_threads, [&](int, int64_t b, int64_t e) {
    for (int64_t i = b; i < e; ++i) fn(i);
  });
}

Timer::Timer() { reset(); }

void Timer::reset() {
  start_ns_ = std::chrono::duration_cast<std::chrono::nanoseconds>(
                  std::chrono::steady_clock::now().time_since_epoch())
                  .count();
}

double Timer::seconds() const {
  int64_t now = std::chrono::duration_cast<std::chrono::nanoseconds>(
                    std::chrono::steady_clock::now().time_since_epoch())
                    .count();
  return static_cast<double>(now - start_ns_) * 1e-9;
}

}  // namespace objf
