#pragma once

#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace edsim {

inline int hardware_workers() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Runs fn(0..n-1), OpenMP-parallel when workers > 1. Work items must be
// independent and write only to their own slots; then results are identical
// to the serial path, which doubles as the reference in tests. Exceptions
// from workers are rethrown on the calling thread (first one wins).
template <class Fn>
void parallel_for(int n, int workers, Fn&& fn) {
#ifdef _OPENMP
  if (workers > 1 && n > 1) {
    std::exception_ptr err = nullptr;
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (int i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
#pragma omp critical
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
    return;
  }
#endif
  (void)workers;
  for (int i = 0; i < n; ++i) fn(i);
}

}  // namespace edsim
