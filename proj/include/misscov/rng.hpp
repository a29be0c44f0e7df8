#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace misscov {

// 64-bit avalanche finalizer (SplitMix64). Also used as the seed/stream mixer
// documented in the README; its exact form is part of the reproducibility
// contract and must not change between releases.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Key for substream `stream` of a master seed. Distinct streams of the same
// master seed are independent for all practical purposes and may be consumed
// concurrently in any order.
constexpr std::uint64_t stream_key(std::uint64_t master, std::uint64_t stream) {
  return mix64((master + kGolden) ^ mix64(stream + kGolden));
}

// Fixed stream ids used across the library.
inline constexpr std::uint64_t kStreamData = 1;      // raw sample generation
inline constexpr std::uint64_t kStreamMask = 2;      // Bernoulli sparsification
inline constexpr std::uint64_t kStreamRotation = 3;  // random orthogonal bases
inline constexpr std::uint64_t kStreamNet = 4;       // direction-net extras
inline constexpr std::uint64_t kStreamProbe = 5;     // operator-norm probe vector

// Counter-based generator: output i is mix64(key + i*golden), i.e. the
// SplitMix64 sequence seeded with `key`. State is one counter, so streams are
// cheap to create and fully reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : key_(key) {}
  Rng(std::uint64_t master, std::uint64_t stream) : key_(stream_key(master, stream)) {}

  std::uint64_t next_u64() {
    counter_ += 1;
    return mix64(key_ + counter_ * kGolden);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as a log() argument.
  double uniform_open01() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  // Gamma(alpha, 1) for alpha >= 1 (Marsaglia-Tsang squeeze).
  double gamma(double alpha) {
    if (!(alpha >= 1.0)) throw std::invalid_argument("Rng::gamma requires alpha >= 1");
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      const double x = normal();
      const double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      const double v = t * t * t;
      const double u = uniform_open01();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  }

  double chi_square(double dof) { return 2.0 * gamma(0.5 * dof); }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace misscov
