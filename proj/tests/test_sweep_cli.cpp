#include <doctest.h>

#include <cmath>
#include <sstream>

#include "misscov/config_io.hpp"
#include "misscov/eigen_jacobi.hpp"
#include "misscov/sweep.hpp"

using namespace misscov;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.d = 3;
  cfg.spectrum = SpectrumTag::geometric(0.7);
  cfg.dist = DistTag::gaussian;
  cfg.p_values = {0.6, 1.0};
  // quarters must clear the median-of-means floor 2*ceil(8 ln(1/delta))
  cfg.n_values = {96, 160};
  cfg.trials = 2;
  cfg.delta = 0.3;
  cfg.master_seed = 2024;
  cfg.estimators = {EstimatorTag::full, EstimatorTag::oracle, EstimatorTag::sample,
                    EstimatorTag::inverse_weighted};
  cfg.output_path = "/tmp/misscov_sweep_test.csv";
  cfg.net_extra_random = 30;
  return cfg;
}

}  // namespace

TEST_CASE("trial seed mixing") {
  const std::uint64_t a = trial_seed(42, 0.5, 1000, 3);
  CHECK(a == trial_seed(42, 0.5, 1000, 3));
  CHECK(a != trial_seed(42, 0.5, 1000, 4));
  CHECK(a != trial_seed(42, 0.5, 1001, 3));
  CHECK(a != trial_seed(42, 0.25, 1000, 3));
  CHECK(a != trial_seed(43, 0.5, 1000, 3));
}

TEST_CASE("sweep record grid and determinism across schedules") {
  ExperimentConfig cfg = small_config();
  const std::vector<TrialRecord> records = run_sweep(cfg);
  CHECK(records.size() == 4 * 2 * 2 * 2);
  CHECK(std::is_sorted(records.begin(), records.end(),
                       [](const TrialRecord& x, const TrialRecord& y) { return x < y; }));
  for (const TrialRecord& r : records) CHECK_FALSE(r.failed);

  const std::string csv1 = records_to_csv(records);
  cfg.threads = 1;
  const std::string csv_serial = records_to_csv(run_sweep(cfg));
  cfg.threads = 4;
  const std::string csv_parallel = records_to_csv(run_sweep(cfg));
  CHECK(csv1 == csv_serial);
  CHECK(csv_serial == csv_parallel);
}

TEST_CASE("undersized quarters become failed records, not aborts") {
  ExperimentConfig cfg = small_config();
  cfg.n_values = {64};  // quarter of 16 is below the floor for delta = 0.2
  cfg.delta = 0.2;
  cfg.trials = 1;
  cfg.p_values = {1.0};
  cfg.estimators = {EstimatorTag::full, EstimatorTag::sample};
  const std::vector<TrialRecord> records = run_sweep(cfg);
  REQUIRE(records.size() == 2);
  for (const TrialRecord& r : records) {
    if (r.estimator == EstimatorTag::full) {
      CHECK(r.failed);
      CHECK(std::isnan(r.error_opnorm));
    } else {
      CHECK_FALSE(r.failed);  // the baseline has no sample floor
    }
  }
  const std::string csv = records_to_csv(records);
  CHECK(csv.find("FAILED") != std::string::npos);
}

TEST_CASE("sample estimator error cross-check") {
  ExperimentConfig cfg = small_config();
  cfg.estimators = {EstimatorTag::sample};
  cfg.p_values = {1.0};
  cfg.n_values = {64};
  cfg.trials = 1;
  const std::vector<TrialRecord> records = run_sweep(cfg);
  REQUIRE(records.size() == 1);

  // recompute the error independently
  const CovarianceSpec sigma = build_covariance(cfg.d, cfg.spectrum, cfg.rotation_seed);
  const std::uint64_t seed = trial_seed(cfg.master_seed, 1.0, 64, 0);
  const MaskedSample s = generate_masked_sample(sigma, cfg.dist, cfg.dof, 1.0, 64, seed);
  SymmetricMatrix m(cfg.d);
  for (std::size_t i = 0; i < 64; ++i)
    for (std::size_t a = 0; a < cfg.d; ++a)
      for (std::size_t b = 0; b <= a; ++b) m.ref(a, b) += s.y[i * cfg.d + a] * s.y[i * cfg.d + b];
  m.scale(1.0 / 64.0);
  CHECK(records[0].error_opnorm ==
        doctest::Approx(operator_norm(m - sigma.sigma)).epsilon(1e-12));
  CHECK(records[0].seed == seed);
}

TEST_CASE("records csv round trip") {
  ExperimentConfig cfg = small_config();
  cfg.trials = 1;
  const std::vector<TrialRecord> records = run_sweep(cfg);
  const std::string csv = records_to_csv(records);
  std::istringstream in(csv);
  const std::vector<TrialRecord> back = records_from_csv(in);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(back[i].estimator == records[i].estimator);
    CHECK(back[i].p == records[i].p);
    CHECK(back[i].n == records[i].n);
    CHECK(back[i].trial == records[i].trial);
    CHECK(back[i].seed == records[i].seed);
    CHECK(back[i].failed == records[i].failed);
    if (records[i].failed)
      CHECK(std::isnan(back[i].error_opnorm));
    else
      CHECK(back[i].error_opnorm == records[i].error_opnorm);
    CHECK(back[i].gate_satisfied == records[i].gate_satisfied);
  }
  // summary carries the failures column
  CHECK(summary_to_csv(records).find("failures") != std::string::npos);
}

TEST_CASE("rate fitting on planted slopes") {
  std::vector<TrialRecord> records;
  for (std::size_t n : {100, 400, 1600, 6400}) {
    for (std::size_t t = 0; t < 3; ++t) {
      TrialRecord r;
      r.estimator = EstimatorTag::full;
      r.p = 1.0;
      r.n = n;
      r.trial = t;
      r.error_opnorm = 4.0 / std::sqrt(static_cast<double>(n));
      records.push_back(r);
    }
  }
  const RateFit fit = fit_rate(records, SweepAxis::n, EstimatorTag::full);
  CHECK(fit.slope == doctest::Approx(-0.5).epsilon(1e-9));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-9));

  std::vector<TrialRecord> prec;
  for (double p : {0.25, 0.5, 1.0}) {
    TrialRecord r;
    r.estimator = EstimatorTag::full;
    r.p = p;
    r.n = 100;
    r.error_opnorm = 2.0 / p;
    prec.push_back(r);
  }
  CHECK(fit_rate(prec, SweepAxis::p, EstimatorTag::full).slope == doctest::Approx(-1.0).epsilon(1e-9));

  CHECK_THROWS(fit_rate(prec, SweepAxis::n, EstimatorTag::full));  // single N value
}

TEST_CASE("config validation") {
  ExperimentConfig cfg = small_config();
  cfg.estimators.clear();
  CHECK_THROWS_WITH_AS(run_sweep(cfg), doctest::Contains("estimators"), std::invalid_argument);
  cfg = small_config();
  cfg.p_values = {1.2};
  CHECK_THROWS(cfg.validate());
  cfg = small_config();
  cfg.n_values = {4};
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("yaml config parsing with line-precise errors") {
  const std::string good =
      "d: 4\n"
      "spectrum: geometric:0.7\n"
      "dist: gaussian\n"
      "p_values: [0.5, 1.0]\n"
      "N_values: [100, 200]\n"
      "trials: 2\n"
      "delta: 0.1\n"
      "master_seed: 7\n"
      "estimators: [full, sample]\n"
      "output_path: out.csv\n"
      "opnorm_constants: {C1: 0.1, L1: 0.5, L2: 0.5}\n";
  const ExperimentConfig cfg = parse_experiment_config(good, "test.yaml");
  CHECK(cfg.d == 4);
  CHECK(cfg.p_values == std::vector<double>{0.5, 1.0});
  CHECK(cfg.estimators.size() == 2);
  CHECK(cfg.resolved_kappa() == doctest::Approx(std::pow(3.0, 0.25)));

  const std::string bad_p =
      "d: 4\n"
      "spectrum: geometric:0.7\n"
      "dist: gaussian\n"
      "p_values: [0.5,\n"
      "  1.7]\n"
      "N_values: [100]\n"
      "trials: 1\n"
      "delta: 0.1\n"
      "master_seed: 7\n"
      "estimators: [full]\n"
      "output_path: out.csv\n";
  CHECK_THROWS_WITH_AS(parse_experiment_config(bad_p, "test.yaml"),
                       doctest::Contains("test.yaml:5"), std::runtime_error);

  const std::string unknown =
      "d: 4\n"
      "spectrum: geometric:0.7\n"
      "dist: gaussian\n"
      "p_values: [0.5]\n"
      "N_values: [100]\n"
      "trials: 1\n"
      "delta: 0.1\n"
      "master_seed: 7\n"
      "estimators: [full]\n"
      "output_path: out.csv\n"
      "tyop: 3\n";
  CHECK_THROWS_WITH_AS(parse_experiment_config(unknown, "cfg.yaml"),
                       doctest::Contains("cfg.yaml:11"), std::runtime_error);

  CHECK_THROWS_WITH_AS(parse_experiment_config("d: [\n", "x.yaml"), doctest::Contains("x.yaml:"),
                       std::runtime_error);
}
