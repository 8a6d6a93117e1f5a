#pragma once

#include <cstddef>
#include <functional>

namespace qdmag {

/// std::thread::hardware_concurrency(), at least 1.
unsigned default_thread_count();

/// Runs body(i) for i in [0, count) on up to `threads` workers. Indices are
/// handed out dynamically; the first exception thrown by any body is rethrown
/// after all workers join. threads <= 1 runs inline in index order.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace qdmag
