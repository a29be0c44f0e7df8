#pragma once

#include <cstddef>
#include <span>

namespace misscov {

// Block count for confidence delta: min(ceil(8 ln(1/delta)), floor(n/2)).
std::size_t mom_block_count(std::size_t n, double delta);

// Median of block means. Blocks are contiguous in input order, all of size
// floor(n/k); remainder samples are discarded. Even block counts take the
// average of the two central means.
double median_of_means(std::span<const double> xs, std::size_t blocks);

// Sub-Gaussian mean estimate at confidence delta. Requires
// n >= 2*ceil(8 ln(1/delta)).
double robust_mean(std::span<const double> xs, double delta);

}  // namespace misscov
