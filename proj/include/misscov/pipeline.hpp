#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>

#include "misscov/oracle_estimator.hpp"
#include "misscov/param_estimators.hpp"
#include "misscov/sampling.hpp"

namespace misscov {

enum class EstimatorMode { full, oracle };

struct OracleInputs {
  double p = 1.0;
  double trace = 0.0;
  double opnorm = 0.0;
};

struct EstimatorConfig {
  double delta = 0.1;
  double kappa = 1.3160740129524924;  // 3^{1/4}, the gaussian constant
  // SIZE_MAX means "use default_extra_random(d)".
  std::size_t net_extra_random = static_cast<std::size_t>(-1);
  OpNormConstants opnorm_constants;
  bool psd_project = false;
  EstimatorMode mode = EstimatorMode::full;
  OracleInputs oracle;  // read in oracle mode only
  double gate_constant = 1.0;

  void validate() const;
};

struct EstimatorReport {
  SymmetricMatrix sigma_hat;
  double p_hat = 0.0;
  double trace_hat = 0.0;
  double opnorm_hat = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::array<std::size_t, 4> split_sizes{};
  bool gate_satisfied = false;
  std::optional<double> error_opnorm;  // filled by callers that know sigma
  double wall_seconds = 0.0;
};

// Four-way split estimator: p from the first quarter, trace from the second,
// operator norm from the third, truncated minimax fits on the fourth.
// Quarters are contiguous blocks in row order, so row order is part of the
// input contract. Oracle mode skips the first three quarters and runs the
// fits on the full sample with the supplied values. Stage failures are
// rethrown with a stage prefix. The sample-size gate
// |Q4| >= gate_constant*(r_hat + ln(1/delta))/p_hat^2 is reported, never
// enforced.
EstimatorReport estimate_covariance(const MaskedSample& sample, const EstimatorConfig& config);

// (1/n) sum_i y_i y_i^T
SymmetricMatrix baseline_sample_second_moment(const MaskedSample& sample);
// p_hat^{-1} Diag(S) + p_hat^{-2} Off(S) with S the sample second moment.
SymmetricMatrix baseline_inverse_weighted(const MaskedSample& sample, double p_hat);

// Flat key=value lines followed by the matrix in the fixture text format.
void write_report(std::ostream& out, const EstimatorReport& report,
                  const std::string& estimator_tag);
void save_report(const std::string& path, const EstimatorReport& report,
                 const std::string& estimator_tag);

}  // namespace misscov
