#include "misscov/covariance_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "misscov/rng.hpp"
#include "misscov/text_format.hpp"

namespace misscov {

SpectrumTag SpectrumTag::geometric(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("geometric spectrum requires gamma in (0,1)");
  SpectrumTag t;
  t.kind = Kind::geometric;
  t.gamma = gamma;
  return t;
}

SpectrumTag SpectrumTag::spiked(double spike, double bulk) {
  if (!(bulk > 0.0) || !(spike >= bulk))
    throw std::invalid_argument("spiked spectrum requires spike >= bulk > 0");
  SpectrumTag t;
  t.kind = Kind::spiked;
  t.spike = spike;
  t.bulk = bulk;
  return t;
}

std::string SpectrumTag::to_string() const {
  switch (kind) {
    case Kind::identity:
      return "identity";
    case Kind::geometric:
      return "geometric:" + format_double(gamma);
    case Kind::spiked:
      return "spiked:" + format_double(spike) + ":" + format_double(bulk);
  }
  return "identity";
}

SpectrumTag SpectrumTag::parse(const std::string& text) {
  if (text == "identity") return identity();
  if (text.rfind("geometric:", 0) == 0) return geometric(parse_double(text.substr(10)));
  if (text.rfind("spiked:", 0) == 0) {
    const std::string rest = text.substr(7);
    const auto colon = rest.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("spiked spectrum needs spiked:<spike>:<bulk>");
    return spiked(parse_double(rest.substr(0, colon)), parse_double(rest.substr(colon + 1)));
  }
  throw std::invalid_argument("unknown spectrum '" + text +
                              "' (expected identity | geometric:<g> | spiked:<s>:<b>)");
}

namespace {

std::vector<double> spectrum_values(std::size_t d, const SpectrumTag& tag) {
  std::vector<double> lam(d, 1.0);
  switch (tag.kind) {
    case SpectrumTag::Kind::identity:
      break;
    case SpectrumTag::Kind::geometric:
      for (std::size_t k = 1; k < d; ++k) lam[k] = lam[k - 1] * tag.gamma;
      break;
    case SpectrumTag::Kind::spiked:
      std::fill(lam.begin(), lam.end(), tag.bulk);
      lam[0] = tag.spike;
      break;
  }
  return lam;
}

// Random orthogonal matrix: modified Gram-Schmidt on a seeded Gaussian matrix,
// column-major orthonormalization. Deterministic given the seed.
std::vector<double> random_orthogonal(std::size_t d, std::uint64_t seed) {
  Rng rng(seed, kStreamRotation);
  std::vector<double> q(d * d);
  for (double& x : q) x = rng.normal();
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t prev = 0; prev < c; ++prev) {
      double dot = 0.0;
      for (std::size_t i = 0; i < d; ++i) dot += q[i * d + c] * q[i * d + prev];
      for (std::size_t i = 0; i < d; ++i) q[i * d + c] -= dot * q[i * d + prev];
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < d; ++i) norm += q[i * d + c] * q[i * d + c];
    norm = std::sqrt(norm);
    if (norm < 1e-8) throw std::runtime_error("random_orthogonal: degenerate draw");
    for (std::size_t i = 0; i < d; ++i) q[i * d + c] /= norm;
  }
  return q;
}

SymmetricMatrix sandwich(std::size_t d, const std::vector<double>& q,
                         const std::vector<double>& lam) {
  // Q diag(lam) Q^T, lower triangle only.
  SymmetricMatrix m(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += q[i * d + k] * lam[k] * q[j * d + k];
      m.ref(i, j) = s;
    }
  return m;
}

}  // namespace

CovarianceSpec build_covariance(std::size_t d, const SpectrumTag& spectrum,
                                std::optional<std::uint64_t> rotation_seed) {
  if (d == 0) throw std::invalid_argument("build_covariance: d must be >= 1");
  // re-validate parameters (tags may come from config files)
  switch (spectrum.kind) {
    case SpectrumTag::Kind::geometric:
      if (!(spectrum.gamma > 0.0 && spectrum.gamma < 1.0))
        throw std::invalid_argument("geometric spectrum requires gamma in (0,1)");
      break;
    case SpectrumTag::Kind::spiked:
      if (!(spectrum.bulk > 0.0) || !(spectrum.spike >= spectrum.bulk))
        throw std::invalid_argument("spiked spectrum requires spike >= bulk > 0");
      break;
    case SpectrumTag::Kind::identity:
      break;
  }

  const std::vector<double> lam = spectrum_values(d, spectrum);
  std::vector<double> sqrt_lam(d);
  for (std::size_t k = 0; k < d; ++k) sqrt_lam[k] = std::sqrt(lam[k]);

  CovarianceSpec spec;
  spec.spectrum = spectrum;
  spec.rotation_seed = rotation_seed;
  if (rotation_seed) {
    const std::vector<double> q = random_orthogonal(d, *rotation_seed);
    spec.sigma = sandwich(d, q, lam);
    spec.sqrt_sigma = sandwich(d, q, sqrt_lam);
  } else {
    spec.sigma = SymmetricMatrix(d);
    spec.sqrt_sigma = SymmetricMatrix(d);
    for (std::size_t k = 0; k < d; ++k) {
      spec.sigma.ref(k, k) = lam[k];
      spec.sqrt_sigma.ref(k, k) = sqrt_lam[k];
    }
  }

  spec.summary.eigenvalues = lam;
  std::sort(spec.summary.eigenvalues.begin(), spec.summary.eigenvalues.end(),
            std::greater<double>());
  spec.summary.trace = 0.0;
  for (double v : lam) spec.summary.trace += v;
  spec.summary.operator_norm = spec.summary.eigenvalues.front();
  spec.summary.effective_rank = spec.summary.trace / spec.summary.operator_norm;
  return spec;
}

}  // namespace misscov
