#pragma once

#include <cstddef>
#include <functional>

namespace rsevi {

/// Number of worker threads used by parallel_for. Defaults to 1.
int thread_count() noexcept;
void set_thread_count(int n);

/// Runs body(i) for every i in [begin, end), split into contiguous chunks
/// across thread_count() workers. Each index must write only its own
/// outputs; results are then independent of the thread count.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& body);

}  // namespace rsevi
