#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace objf {

int hardware_threads();

// Resolve a thread-count request: 0 means "all hardware threads".
int resolve_threads(int requested);

// Splits [0, n) into exactly num_chunks contiguous ranges and runs
// fn(chunk_index, begin, end) for each, distributing chunks over threads.
// The chunk decomposition is fixed by num_chunks alone, so per-chunk results
// combined in chunk order do not depend on the thread count.
void parallel_for_chunks(int64_t n, int num_chunks, int num_threads,
                         const std::function<void(int, int64_t, int64_t)>& fn);

// Convenience wrapper with one chunk per thread-sized slice of work; only for
// jobs whose outputs are written to disjoint slots indexed by position.
void parallel_for(int64_t n, int num_threads,
                  const std::function<void(int64_t)>& fn);

struct Timer {
  Timer();
  double seconds() const;
  void reset();

private:
  int64_t start_ns_;
};

}  // namespace objf
