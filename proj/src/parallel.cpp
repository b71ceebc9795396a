#include "beamccs/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace beamccs {

#ifdef _OPENMP

namespace {
int hardware_default() {
  static const int n = omp_get_max_threads();
  return n;
}
}  // namespace

int max_threads() { return omp_get_max_threads(); }

void set_num_threads(int n) {
  omp_set_num_threads(n > 0 ? n : hardware_default());
}

#else

int max_threads() { return 1; }
void set_num_threads(int) {}

#endif

}  // namespace beamccs
