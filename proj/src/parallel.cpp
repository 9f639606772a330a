#include "zd/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>

#include <omp.h>

namespace zd {

int apply_thread_limit_from_env() {
  if (const char* v = std::getenv("DISPATCH_THREADS")) {
    int n = 0;
    const auto res = std::from_chars(v, v + std::strlen(v), n);
    if (res.ec == std::errc() && n > 0) omp_set_num_threads(n);
  }
  return omp_get_max_threads();
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace zd
