#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "misscov/covariance_model.hpp"
#include "misscov/pipeline.hpp"
#include "misscov/sampling.hpp"

namespace misscov {

enum class EstimatorTag { full, oracle, sample, inverse_weighted };

std::string estimator_tag_name(EstimatorTag tag);
EstimatorTag estimator_tag_parse(const std::string& name);

struct ExperimentConfig {
  std::size_t d = 0;
  SpectrumTag spectrum;
  std::optional<std::uint64_t> rotation_seed;
  DistTag dist = DistTag::gaussian;
  double dof = 0.0;
  std::vector<double> p_values;
  std::vector<std::size_t> n_values;
  std::size_t trials = 1;
  double delta = 0.1;
  std::uint64_t master_seed = 0;
  std::vector<EstimatorTag> estimators;
  std::string output_path;

  double kappa = 0.0;  // 0 = analytic constant of the generator
  std::size_t net_extra_random = static_cast<std::size_t>(-1);
  bool psd_project = false;
  OpNormConstants opnorm_constants;
  double gate_constant = 1.0;
  bool record_timing = false;  // off by default so sweep CSVs are byte-reproducible
  int threads = 0;             // 0 = runtime default

  void validate() const;
  double resolved_kappa() const;
};

struct TrialRecord {
  EstimatorTag estimator = EstimatorTag::full;
  std::size_t d = 0;
  double p = 1.0;
  std::size_t n = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double error_opnorm = 0.0;  // NaN for failed trials
  double p_hat = 0.0;
  double trace_hat = 0.0;
  double opnorm_hat = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  bool gate_satisfied = false;
  double wall_seconds = 0.0;
  bool failed = false;

  bool operator<(const TrialRecord& o) const;
};

// Deterministic per-cell seed: chained SplitMix64 avalanche over
// (master_seed, bits(p), N, trial). Documented in the README and stable
// across releases.
std::uint64_t trial_seed(std::uint64_t master_seed, double p, std::size_t n, std::size_t trial);

// One dataset per (p, N, trial) cell, every requested estimator on it.
// Cells run on an OpenMP pool (config.threads); records are emitted sorted by
// (estimator, p, N, trial), so output is schedule-independent. A failed trial
// becomes a failed record, never an aborted sweep.
std::vector<TrialRecord> run_sweep(const ExperimentConfig& config);

// Records CSV: header + one row per record, field order matching TrialRecord,
// '.' decimal separator, '\n' newlines. Failed records carry FAILED in the
// error column.
std::string records_to_csv(const std::vector<TrialRecord>& records);
std::vector<TrialRecord> records_from_csv(std::istream& in);
std::vector<TrialRecord> load_records_csv(const std::string& path);

// Per (estimator, p, N) cell: error quantiles 0.5/0.9/0.95 over non-failed
// trials plus a failure count.
std::string summary_to_csv(const std::vector<TrialRecord>& records);

enum class SweepAxis { n, p };

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Least squares of ln(median error) against ln(axis value); failed records
// excluded. Needs >= 3 distinct axis values.
RateFit fit_rate(const std::vector<TrialRecord>& records, SweepAxis axis, EstimatorTag tag);

}  // namespace misscov
