#pragma once

#include <cstddef>
#include <functional>

namespace zgs {

/// Runs `body(i)` for i in [0, count) on up to `threads` workers. 0 or 1 runs
/// sequentially on the calling thread. Work items must write only to their
/// own slot; the first exception by index is rethrown after all workers join.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace zgs
