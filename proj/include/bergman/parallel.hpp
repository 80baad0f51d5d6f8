#pragma once

#include <cstddef>
#include <functional>

namespace bergman {

/// Worker count: BERGMAN_THREADS if set and positive, else hardware concurrency.
std::size_t thread_count();

/// Runs body(i) for i in [0, count). Work is split into fixed index blocks so
/// that callers writing per-index results and reducing them in index order get
/// identical output for any thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace bergman
