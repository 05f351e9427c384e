#pragma once

#include <cstddef>
#include <functional>

namespace cvmp {

// Runs task(0..n-1) on up to `threads` workers pulling indices from a shared counter. Tasks must
// write only to their own output slots. If tasks throw, the exception of the lowest failing index
// is rethrown after all workers stop.
void for_each_parcel(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& task);

}  // namespace cvmp
