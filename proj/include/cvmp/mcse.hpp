#pragma once

#include <cstdint>
#include <span>

namespace cvmp {

// Non-overlapping batch means with batch size floor(sqrt(n)); leftover tail samples are dropped.
// Returns 0 for constant traces and for n < 4.
double batch_means_mcse(std::span<const double> trace);
double batch_means_mcse(std::span<const std::uint8_t> trace);

}  // namespace cvmp
