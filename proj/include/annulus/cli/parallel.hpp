#pragma once

// Index-parallel loop over a fixed worker count. Results are written by
// index, so the output does not depend on the number of workers.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace annulus::cli {

/// Calls fn(i) for i in [0, n) on up to `threads` workers. If any call
/// throws, the exception of the lowest failing index is rethrown.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
  std::vector<std::exception_ptr> errors(n);
  auto run = [&](std::size_t w) {
    for (std::size_t i = w; i < n; i += workers) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace annulus::cli
