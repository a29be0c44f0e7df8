#include "misscov/direction_net.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "misscov/rng.hpp"

namespace misscov {

std::size_t default_extra_random(std::size_t d) { return std::min<std::size_t>(50 * d, 5000); }

DirectionNet build_net(std::size_t d, std::size_t extra_random, std::uint64_t seed) {
  if (d == 0) throw std::invalid_argument("build_net: d must be >= 1");
  DirectionNet net;
  net.dim = d;
  net.seed = seed;
  net.count = d + d * (d - 1) + extra_random;
  net.vectors.assign(net.count * d, 0.0);

  std::size_t k = 0;
  for (std::size_t i = 0; i < d; ++i, ++k) net.vectors[k * d + i] = 1.0;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      net.vectors[k * d + i] = inv_sqrt2;
      net.vectors[k * d + j] = inv_sqrt2;
      ++k;
      net.vectors[k * d + i] = inv_sqrt2;
      net.vectors[k * d + j] = -inv_sqrt2;
      ++k;
    }

  Rng rng(seed, kStreamNet);
  for (std::size_t r = 0; r < extra_random; ++r, ++k) {
    double norm_sq = 0.0;
    do {
      norm_sq = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double g = rng.normal();
        net.vectors[k * d + i] = g;
        norm_sq += g * g;
      }
    } while (norm_sq < 1e-24);
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (std::size_t i = 0; i < d; ++i) net.vectors[k * d + i] *= inv;
  }
  return net;
}

SupResult sup_abs_over_net(const DirectionNet& net,
                           const std::function<double(std::span<const double>)>& f) {
  if (net.count == 0) throw std::invalid_argument("sup_abs_over_net: empty net");
  SupResult best{-1.0, 0};
  for (std::size_t k = 0; k < net.count; ++k) {
    const double val = f(net.vec(k));
    if (!std::isfinite(val)) {
      std::ostringstream msg;
      msg << "sup_abs_over_net: non-finite value at direction " << k;
      throw std::runtime_error(msg.str());
    }
    const double mag = std::abs(val);
    if (mag > best.value) best = {mag, k};
  }
  return best;
}

}  // namespace misscov
