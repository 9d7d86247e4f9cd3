#pragma once

#include <cstddef>
#include <functional>

namespace llmforest {

/// Runs fn(0..count-1) on up to `workers` threads. workers <= 1 runs inline
/// in index order. The first exception thrown by any task is rethrown after
/// all threads join; remaining tasks are not started once one has failed.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace llmforest
