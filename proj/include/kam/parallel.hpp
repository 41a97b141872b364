#pragma once

#include <cstddef>
#include <functional>

namespace kam {

// Worker count: KAMSEP_THREADS if set and positive, else hardware concurrency.
std::size_t thread_count();

// Runs body(i) for i in [begin, end) over contiguous static chunks. Each index
// must write only its own outputs; results are then independent of the
// worker count.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& body);

}  // namespace kam
