#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace chaosnet::parallel {

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline bool compiled_with_openmp() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

// Loops below this trip count stay serial; the fork/join overhead dominates
// on the small agent counts of the bundled scenarios.
inline constexpr int kMinParallelWork = 16;

}  // namespace chaosnet::parallel
