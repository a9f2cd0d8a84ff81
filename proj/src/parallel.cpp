#include "revpref/parallel.hpp"

#include <cstdlib>
#include <omp.h>
#include <string>

namespace revpref {

int worker_threads() { return omp_get_max_threads(); }

void set_worker_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("REVPREF_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return omp_get_max_threads();
}

}  // namespace revpref
