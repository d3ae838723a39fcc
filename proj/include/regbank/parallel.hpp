#pragma once

#include <cstddef>
#include <exception>

#include <omp.h>

namespace regbank {

/// Worker count for every OpenMP region; 0 leaves the OpenMP default.
inline void set_worker_count(int workers) {
  if (workers > 0) omp_set_num_threads(workers);
}

/// Dynamic-schedule loop over [0, n). An exception escaping an OpenMP region
/// terminates the process, so the first one is captured and rethrown after
/// the loop.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  std::exception_ptr error;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(regbank_parallel_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace regbank
