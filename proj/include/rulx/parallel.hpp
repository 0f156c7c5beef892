#pragma once

#include <cstddef>
#include <functional>

namespace rulx {

/// Upper bound on worker threads. Defaults to RUL_EXPLAIN_THREADS when set,
/// else the hardware concurrency.
std::size_t thread_limit();
void set_thread_limit(std::size_t n);

/// Runs body(i) for i in [0, n). Work items must not share mutable state;
/// results are written to per-index slots so scheduling never affects output.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace rulx
