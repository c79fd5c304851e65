#include "l2ot/parallel.hpp"

#include <atomic>
#include <thread>

#ifdef L2OT_HAVE_OPENMP
#include <omp.h>
#endif

namespace l2ot {

namespace {
std::atomic<int> g_threads{0};
}

void set_num_threads(int n) {
  if (n < 0) n = 0;
  g_threads.store(n);
#ifdef L2OT_HAVE_OPENMP
  int effective = n;
  if (effective == 0) {
    effective = static_cast<int>(std::thread::hardware_concurrency());
    if (effective <= 0) effective = 1;
  }
  omp_set_num_threads(effective);
#endif
}

int num_threads() {
  int n = g_threads.load();
  if (n > 0) return n;
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  return hw > 0 ? hw : 1;
}

double pairwise_tree_sum(std::vector<double> partials) {
  if (partials.empty()) return 0.0;
  std::size_t n = partials.size();
  while (n > 1) {
    const std::size_t half = n / 2;
    for (std::size_t i = 0; i < half; ++i) {
      partials[i] = partials[2 * i] + partials[2 * i + 1];
    }
    if (n % 2 == 1) {
      partials[half] = partials[n - 1];
      n = half + 1;
    } else {
      n = half;
    }
  }
  return partials[0];
}

}  // namespace l2ot
