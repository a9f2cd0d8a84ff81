#pragma once

// Loop execution policies. Every parallel kernel has a serial counterpart
// selected by Execution::Serial; both must produce identical results.

#include <exception>
#include <vector>

namespace revpref {

enum class Execution { Serial, Parallel };

/// Worker count used by Execution::Parallel loops.
int worker_threads();
void set_worker_threads(int n);

/// Resolves a thread count from an explicit request (> 0) or the
/// REVPREF_THREADS environment variable, else the OpenMP default.
int resolve_thread_count(int requested);

/// Runs body(i) for i in [0, n). Exceptions are collected and the one from
/// the lowest index is rethrown after the loop.
template <class Body>
void parallel_for(Execution ex, long long n, Body&& body) {
  if (ex == Execution::Serial || n < 2) {
    for (long long i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  bool failed = false;
#pragma omp parallel for schedule(dynamic) reduction(|| : failed)
  for (long long i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
      failed = true;
    }
  }
  if (!failed) return;
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace revpref
