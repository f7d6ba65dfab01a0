#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <vector>

namespace surropt {

/// Worker cap: SURROPT_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Every index
/// runs even if others throw; the returned vector holds the exception (or
/// null) per index so callers reduce in index order.
std::vector<std::exception_ptr> parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Same as parallel_for but rethrows the first (lowest-index) failure.
void parallel_for_all(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace surropt
