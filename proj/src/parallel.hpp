#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace emdg::detail {

inline int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// 0 means "whatever the runtime default is".
inline int pick_threads(int requested) {
  return requested > 0 ? requested : hardware_threads();
}

}  // namespace emdg::detail
