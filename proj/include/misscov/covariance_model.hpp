#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "misscov/eigen_jacobi.hpp"
#include "misscov/symmetric_matrix.hpp"

namespace misscov {

// Spectrum families with controllable effective rank.
struct SpectrumTag {
  enum class Kind { identity, geometric, spiked };
  Kind kind = Kind::identity;
  double gamma = 0.0;  // geometric: eigenvalues gamma^k, k = 0..d-1
  double spike = 0.0;  // spiked: {spike, bulk, ..., bulk}
  double bulk = 0.0;

  static SpectrumTag identity() { return {}; }
  static SpectrumTag geometric(double gamma);
  static SpectrumTag spiked(double spike, double bulk);

  std::string to_string() const;
  static SpectrumTag parse(const std::string& text);
};

struct CovarianceSpec {
  SymmetricMatrix sigma;
  SymmetricMatrix sqrt_sigma;  // PSD square root
  SpectralSummary summary;     // computed exactly from the spectrum
  SpectrumTag spectrum;
  std::optional<std::uint64_t> rotation_seed;
};

// Sigma = Q diag(spectrum) Q^T with Q a seeded random orthogonal matrix, or
// the identity when rotation_seed is empty. The summary comes from the
// spectrum itself, not from a numerical decomposition.
CovarianceSpec build_covariance(std::size_t d, const SpectrumTag& spectrum,
                                std::optional<std::uint64_t> rotation_seed);

}  // namespace misscov
