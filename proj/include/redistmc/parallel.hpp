#pragma once

#include <cstddef>
#include <functional>

namespace redistmc {

// Calls task(i) for i in [0, count) on up to `workers` threads (0 = hardware
// concurrency). Tasks must write only to their own slot. The first exception
// thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& task);

}  // namespace redistmc
