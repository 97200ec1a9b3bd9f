#pragma once

#include <cstddef>
#include <functional>

namespace dfs {

// Runs fn(i) for i in [0, count) on `workers` threads. Each index writes only
// its own output slot, so results do not depend on scheduling. The exception
// from the lowest failing index is rethrown after all workers finish.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace dfs
