#pragma once

#include <cstdint>
#include <thread>

#ifdef MSSZ_HAVE_OPENMP
#include <omp.h>
#endif

namespace mssz {

// Thread configuration for the parallel-over-vertices / parallel-over-critical-points
// phases.  threads == 1 (or serial == true) selects the deterministic reference path:
// plain index-order loops, no atomics.
struct ExecPolicy {
  int threads = 0;  // 0 = hardware default
  bool serial = false;

  int resolved_threads() const {
    if (serial) return 1;
    if (threads > 0) return threads;
#ifdef MSSZ_HAVE_OPENMP
    return omp_get_max_threads();
#else
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
#endif
  }

  bool is_serial() const { return resolved_threads() <= 1; }

  static ExecPolicy serial_policy() { return ExecPolicy{1, true}; }
};

// Index-parallel loop. body(i) must write only its own slots; reads of shared state
// follow each call site's documented race contract.
template <class Body>
inline void parallel_for(std::uint64_t n, const ExecPolicy& policy, Body&& body) {
  const int nt = policy.resolved_threads();
  if (nt <= 1 || n < 2) {
    for (std::uint64_t i = 0; i < n; ++i) body(i);
    return;
  }
#ifdef MSSZ_HAVE_OPENMP
#pragma omp parallel for num_threads(nt) schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
    body(static_cast<std::uint64_t>(i));
#else
  for (std::uint64_t i = 0; i < n; ++i) body(i);
#endif
}

}  // namespace mssz
