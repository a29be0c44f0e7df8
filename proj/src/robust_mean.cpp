#include "misscov/robust_mean.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace misscov {

std::size_t mom_block_count(std::size_t n, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("robust_mean: delta outside (0,1)");
  const auto target = static_cast<std::size_t>(std::ceil(8.0 * std::log(1.0 / delta)));
  return std::min(std::max<std::size_t>(target, 1), n / 2);
}

double median_of_means(std::span<const double> xs, std::size_t blocks) {
  if (blocks == 0 || xs.size() < blocks)
    throw std::invalid_argument("median_of_means: bad block count");
  const std::size_t block_len = xs.size() / blocks;
  std::vector<double> means(blocks);
  for (std::size_t b = 0; b < blocks; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < block_len; ++i) s += xs[b * block_len + i];
    means[b] = s / static_cast<double>(block_len);
  }
  std::sort(means.begin(), means.end());
  if (blocks % 2 == 1) return means[blocks / 2];
  return 0.5 * (means[blocks / 2 - 1] + means[blocks / 2]);
}

double robust_mean(std::span<const double> xs, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("robust_mean: delta outside (0,1)");
  const auto need = static_cast<std::size_t>(std::ceil(8.0 * std::log(1.0 / delta)));
  if (xs.size() < 2 * std::max<std::size_t>(need, 1))
    throw std::invalid_argument("robust_mean: insufficient sample for confidence level");
  return median_of_means(xs, mom_block_count(xs.size(), delta));
}

}  // namespace misscov
