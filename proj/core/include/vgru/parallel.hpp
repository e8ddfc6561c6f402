// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.
//
// Minimal shared thread pool. Work is split into contiguous index ranges;
// every output element is produced by exactly one range, so results are
// bitwise independent of the worker count.

#pragma once

#include <cstddef>
#include <functional>

namespace vgru {

// Worker cap from the environment variable VGRU_THREADS (0 or unset = all
// hardware threads). Read once at first use.
int max_threads();

// Runtime cap below max_threads, 0 = none. Lets tests compare single- and
// multi-worker runs within one process.
void set_thread_override(int n);

// Runs fn(lo, hi) over a partition of [0, n). `grain` is the smallest range
// worth dispatching; below it everything runs inline on the caller.
void parallel_for(std::size_t n, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& fn);

inline void parallel_for(std::size_t n,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
  parallel_for(n, 1, fn);
}

}  // namespace vgru
