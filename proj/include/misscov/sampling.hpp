#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "misscov/covariance_model.hpp"

namespace misscov {

enum class DistTag { gaussian, student_t };

std::string dist_to_string(DistTag tag, double dof);
void dist_from_string(const std::string& text, DistTag& tag, double& dof);

// Analytic L4-L2 constant of the generator: 3^{1/4} for gaussian,
// (3(dof-2)/(dof-4))^{1/4} for student_t.
double analytic_kappa(DistTag tag, double dof);

// Observed data with Bernoulli-missing entries. Missing entries are stored as
// exact 0.0; the mask is bookkeeping only and estimators never read it.
struct MaskedSample {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> y;           // n*d row-major
  std::vector<std::uint8_t> mask;  // 1 = kept
  double true_p = 1.0;
  DistTag dist = DistTag::gaussian;
  double dof = 0.0;  // student_t only
  std::uint64_t seed = 0;

  std::span<const double> row(std::size_t i) const { return {y.data() + i * d, d}; }
};

// Rows X_i = sqrt_sigma * z_i with z_i iid standard normal.
std::vector<double> sample_gaussian(const CovarianceSpec& spec, std::size_t n, std::uint64_t seed);

// Rows X_i = sqrt((dof-2)/W_i) * sqrt_sigma * z_i, W_i ~ chi^2(dof); the
// covariance of X equals sigma exactly. Requires dof > 4 so fourth moments
// exist.
std::vector<double> sample_student_t(const CovarianceSpec& spec, double dof, std::size_t n,
                                     std::uint64_t seed);

// Keeps each entry independently with probability p, zeroes it otherwise.
MaskedSample sparsify(std::span<const double> x, std::size_t n, std::size_t d, double p,
                      std::uint64_t seed);

// One-shot generation: X from (seed, data stream), mask from (seed, mask
// stream); metadata recorded for the dataset header.
MaskedSample generate_masked_sample(const CovarianceSpec& spec, DistTag dist, double dof, double p,
                                    std::size_t n, std::uint64_t seed);

// Empirical L4-L2 ratio: max over net directions v of m4(v)^{1/4} / m2(v)^{1/2}
// for the one-dimensional marginals <x_i, v>. Requires n >= 100; throws on a
// direction with zero empirical second moment.
struct DirectionNet;
double audit_kappa(std::span<const double> x, std::size_t n, std::size_t d,
                   const DirectionNet& net);

// Dataset dump: header "N d p seed dist", then N rows of d decimals.
void save_dataset(const std::string& path, const MaskedSample& sample);
MaskedSample load_dataset(const std::string& path);

}  // namespace misscov
