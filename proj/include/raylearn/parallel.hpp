#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace raylearn {

inline int hardware_parallelism() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// 0 or negative requests the hardware default.
inline int resolve_threads(int requested) {
  return requested > 0 ? requested : hardware_parallelism();
}

// Slot of the calling worker inside a parallel_for body; 0 outside one.
// Always below the `threads` passed to the enclosing parallel_for.
inline int worker_index() {
#ifdef _OPENMP
  return omp_get_thread_num();
#else
  return 0;
#endif
}

// Runs fn(i) for i in [0, count). threads <= 1 takes the plain serial loop,
// which is also the reference behavior the parallel path must reproduce.
// fn may only write to per-index or per-worker slots.
template <typename Fn>
void parallel_for(int64_t count, int threads, Fn&& fn) {
  if (threads <= 1) {
    for (int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (int64_t i = 0; i < count; ++i) fn(i);
#else
  for (int64_t i = 0; i < count; ++i) fn(i);
#endif
}

}  // namespace raylearn
