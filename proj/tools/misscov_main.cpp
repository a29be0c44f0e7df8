#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "misscov/config_io.hpp"
#include "misscov/eigen_jacobi.hpp"
#include "misscov/invariants.hpp"
#include "misscov/matrix_io.hpp"
#include "misscov/pipeline.hpp"
#include "misscov/sampling.hpp"
#include "misscov/sweep.hpp"
#include "misscov/text_format.hpp"

namespace {

// exit codes: 0 ok, 1 validation error, 2 invariant failure, 3 runtime failure
constexpr int kOk = 0;
constexpr int kValidationError = 1;
constexpr int kInvariantFailure = 2;
constexpr int kRuntimeFailure = 3;

struct GenArgs {
  std::size_t d = 10;
  std::string spectrum = "geometric:0.7";
  std::optional<std::uint64_t> rotation_seed;
  std::string dist = "gaussian";
  double p = 1.0;
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  std::string out;
  std::string sigma_out;
};

int run_gen(const GenArgs& args) {
  const misscov::SpectrumTag spectrum = misscov::SpectrumTag::parse(args.spectrum);
  misscov::DistTag dist;
  double dof;
  misscov::dist_from_string(args.dist, dist, dof);
  const misscov::CovarianceSpec spec =
      misscov::build_covariance(args.d, spectrum, args.rotation_seed);
  const misscov::MaskedSample sample =
      misscov::generate_masked_sample(spec, dist, dof, args.p, args.n, args.seed);
  misscov::save_dataset(args.out, sample);
  if (!args.sigma_out.empty()) misscov::save_matrix(args.sigma_out, spec.sigma);
  std::cout << "wrote " << args.out << " (N=" << args.n << ", d=" << args.d << ")\n";
  return kOk;
}

struct EstimateArgs {
  std::string data;
  double delta = 0.1;
  std::string kappa = "auto";
  std::string mode = "full";
  double oracle_p = 0.0;
  double oracle_trace = 0.0;
  double oracle_opnorm = 0.0;
  std::string sigma_path;  // ground truth: oracle inputs + error reporting
  bool psd_project = false;
  std::size_t net_extra = static_cast<std::size_t>(-1);
  std::string out;
};

int run_estimate(const EstimateArgs& args) {
  const misscov::MaskedSample sample = misscov::load_dataset(args.data);

  misscov::EstimatorConfig config;
  config.delta = args.delta;
  config.psd_project = args.psd_project;
  config.net_extra_random = args.net_extra;
  config.kappa = args.kappa == "auto" ? misscov::analytic_kappa(sample.dist, sample.dof)
                                      : misscov::parse_double(args.kappa);

  std::optional<misscov::SymmetricMatrix> sigma;
  if (!args.sigma_path.empty()) sigma = misscov::load_matrix(args.sigma_path);

  if (args.mode == "oracle") {
    config.mode = misscov::EstimatorMode::oracle;
    if (sigma) {
      const misscov::SpectralSummary summary = misscov::spectral_summary(*sigma);
      config.oracle.trace = summary.trace;
      config.oracle.opnorm = summary.operator_norm;
      config.oracle.p = args.oracle_p > 0.0 ? args.oracle_p : sample.true_p;
    } else {
      config.oracle.p = args.oracle_p;
      config.oracle.trace = args.oracle_trace;
      config.oracle.opnorm = args.oracle_opnorm;
    }
  } else if (args.mode != "full") {
    throw std::invalid_argument("mode must be full or oracle");
  }

  misscov::EstimatorReport report = misscov::estimate_covariance(sample, config);
  if (sigma) report.error_opnorm = misscov::operator_norm(report.sigma_hat - *sigma);

  const std::string tag = args.mode;
  if (args.out.empty())
    misscov::write_report(std::cout, report, tag);
  else {
    misscov::save_report(args.out, report, tag);
    std::cout << "wrote " << args.out << "\n";
  }
  return kOk;
}

int run_sweep_cmd(const std::string& config_path, const std::string& out_override) {
  misscov::ExperimentConfig config = misscov::load_experiment_config(config_path);
  if (!out_override.empty()) config.output_path = out_override;
  const std::vector<misscov::TrialRecord> records = misscov::run_sweep(config);
  {
    std::ofstream f(config.output_path);
    if (!f) throw std::runtime_error("cannot open for writing: " + config.output_path);
    f << misscov::records_to_csv(records);
  }
  const std::string summary_path = config.output_path + ".summary.csv";
  {
    std::ofstream f(summary_path);
    if (!f) throw std::runtime_error("cannot open for writing: " + summary_path);
    f << misscov::summary_to_csv(records);
  }
  std::size_t failures = 0;
  for (const auto& r : records) failures += r.failed ? 1 : 0;
  std::cout << "wrote " << config.output_path << " (" << records.size() << " records, "
            << failures << " failed) and " << summary_path << "\n";
  return kOk;
}

int run_rate(const std::string& csv_path, const std::string& axis, const std::string& estimator) {
  const std::vector<misscov::TrialRecord> records = misscov::load_records_csv(csv_path);
  const misscov::SweepAxis ax = axis == "N" ? misscov::SweepAxis::n
                              : axis == "p" ? misscov::SweepAxis::p
                                            : throw std::invalid_argument("axis must be N or p");
  const misscov::RateFit fit =
      misscov::fit_rate(records, ax, misscov::estimator_tag_parse(estimator));
  std::cout << "estimator=" << estimator << " axis=" << axis
            << " slope=" << misscov::format_double(fit.slope)
            << " intercept=" << misscov::format_double(fit.intercept)
            << " r_squared=" << misscov::format_double(fit.r_squared) << "\n";
  return kOk;
}

int run_verify(std::uint64_t seed) {
  const std::vector<misscov::BatteryResult> results = misscov::run_invariant_suite(seed);
  misscov::print_suite(std::cout, results);
  return misscov::suite_passed(results) ? kOk : kInvariantFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covariance estimation under heavy tails and missing observations"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* cmd_gen = app.add_subcommand("gen", "write a synthetic dataset fixture");
  cmd_gen->add_option("--d", gen.d, "dimension")->check(CLI::PositiveNumber);
  cmd_gen->add_option("--spectrum", gen.spectrum, "identity | geometric:<g> | spiked:<s>:<b>");
  std::uint64_t rotation_seed_raw = 0;
  CLI::Option* rot = cmd_gen->add_option("--rotation-seed", rotation_seed_raw,
                                         "random orthogonal basis seed (omit for diagonal)");
  cmd_gen->add_option("--dist", gen.dist, "gaussian | student_t(<dof>)");
  cmd_gen->add_option("--p", gen.p, "observation probability in (0,1]");
  cmd_gen->add_option("--N", gen.n, "sample size")->check(CLI::PositiveNumber);
  cmd_gen->add_option("--seed", gen.seed, "master seed");
  cmd_gen->add_option("--out", gen.out, "dataset path")->required();
  cmd_gen->add_option("--sigma-out", gen.sigma_out, "also write the true covariance fixture");

  EstimateArgs est;
  CLI::App* cmd_est = app.add_subcommand("estimate", "run one estimator on a dataset");
  cmd_est->add_option("--data", est.data, "dataset path")->required();
  cmd_est->add_option("--delta", est.delta, "confidence level in (0,1)");
  cmd_est->add_option("--kappa", est.kappa, "L4-L2 constant or 'auto'");
  cmd_est->add_option("--mode", est.mode, "full | oracle");
  cmd_est->add_option("--oracle-p", est.oracle_p, "oracle observation probability");
  cmd_est->add_option("--oracle-trace", est.oracle_trace, "oracle trace");
  cmd_est->add_option("--oracle-opnorm", est.oracle_opnorm, "oracle operator norm");
  cmd_est->add_option("--sigma", est.sigma_path, "true covariance fixture (enables error output)");
  cmd_est->add_flag("--psd-project", est.psd_project, "clip negative eigenvalues of the estimate");
  cmd_est->add_option("--net-extra", est.net_extra, "random net directions beyond the structured set");
  cmd_est->add_option("--out", est.out, "report path (default stdout)");

  std::string sweep_config, sweep_out;
  CLI::App* cmd_sweep = app.add_subcommand("sweep", "run an experiment grid from a config file");
  cmd_sweep->add_option("--config", sweep_config, "YAML experiment config")->required();
  cmd_sweep->add_option("--out", sweep_out, "override output_path");

  std::string rate_csv, rate_axis = "N", rate_estimator = "full";
  CLI::App* cmd_rate = app.add_subcommand("rate", "fit a convergence slope from a records CSV");
  cmd_rate->add_option("--csv", rate_csv, "records CSV path")->required();
  cmd_rate->add_option("--x", rate_axis, "axis: N or p");
  cmd_rate->add_option("--estimator", rate_estimator, "estimator tag");

  std::uint64_t verify_seed = 20240817;
  CLI::App* cmd_verify = app.add_subcommand("verify", "run the invariant suite");
  cmd_verify->add_option("--seed", verify_seed, "suite seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kValidationError;
  }

  try {
    if (cmd_gen->parsed()) {
      if (rot->count() > 0) gen.rotation_seed = rotation_seed_raw;
      return run_gen(gen);
    }
    if (cmd_est->parsed()) return run_estimate(est);
    if (cmd_sweep->parsed()) return run_sweep_cmd(sweep_config, sweep_out);
    if (cmd_rate->parsed()) return run_rate(rate_csv, rate_axis, rate_estimator);
    if (cmd_verify->parsed()) return run_verify(verify_seed);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const std::exception& e) {
    const std::string what = e.what();
    std::cerr << "error: " << what << "\n";
    // config/file validation surfaces as a validation failure
    if (what.find("config") != std::string::npos || what.find(".yaml") != std::string::npos ||
        what.find("cannot open") != std::string::npos)
      return kValidationError;
    return kRuntimeFailure;
  }
  return kOk;
}
