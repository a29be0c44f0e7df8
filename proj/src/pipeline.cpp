#include "misscov/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "misscov/eigen_jacobi.hpp"
#include "misscov/matrix_io.hpp"
#include "misscov/rng.hpp"
#include "misscov/text_format.hpp"

namespace misscov {

void EstimatorConfig::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("config: delta outside (0,1)");
  if (!(kappa >= 1.0)) throw std::invalid_argument("config: kappa must be >= 1");
  if (!(gate_constant > 0.0)) throw std::invalid_argument("config: gate_constant must be > 0");
  opnorm_constants.validate();
  if (mode == EstimatorMode::oracle) {
    if (!(oracle.p > 0.0 && oracle.p <= 1.0))
      throw std::invalid_argument("config: oracle p outside (0,1]");
    if (!(oracle.trace > 0.0) || !(oracle.opnorm > 0.0))
      throw std::invalid_argument("config: oracle trace/opnorm must be positive");
  }
}

namespace {

MaskedSample slice_rows(const MaskedSample& sample, std::size_t begin, std::size_t count) {
  MaskedSample s;
  s.n = count;
  s.d = sample.d;
  s.y.assign(sample.y.begin() + begin * sample.d, sample.y.begin() + (begin + count) * sample.d);
  s.mask.assign(sample.mask.begin() + begin * sample.d,
                sample.mask.begin() + (begin + count) * sample.d);
  s.true_p = sample.true_p;
  s.dist = sample.dist;
  s.dof = sample.dof;
  s.seed = sample.seed;
  return s;
}

template <typename Fn>
auto stage(const char* label, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(label) + ": " + e.what());
  }
}

SymmetricMatrix psd_projection(const SymmetricMatrix& m) {
  const EighResult eig = eigh(m);
  const std::size_t d = m.dim();
  SymmetricMatrix out(d);
  for (std::size_t k = 0; k < d; ++k) {
    const double lam = std::max(eig.eigenvalues[k], 0.0);
    if (lam == 0.0) continue;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j <= i; ++j)
        out.ref(i, j) += lam * eig.eigenvectors[i * d + k] * eig.eigenvectors[j * d + k];
  }
  return out;
}

}  // namespace

EstimatorReport estimate_covariance(const MaskedSample& sample, const EstimatorConfig& config) {
  config.validate();
  const std::size_t n = sample.n, d = sample.d;
  if (n < 8) throw std::invalid_argument("estimate_covariance: need at least 8 rows");
  if (d == 0 || sample.y.size() != n * d)
    throw std::invalid_argument("estimate_covariance: malformed sample");

  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t extra = config.net_extra_random == static_cast<std::size_t>(-1)
                                ? default_extra_random(d)
                                : config.net_extra_random;
  const DirectionNet net = build_net(d, extra, stream_key(sample.seed, kStreamNet));

  EstimatorReport report;
  std::size_t fit_begin = 0, fit_count = n;

  if (config.mode == EstimatorMode::oracle) {
    report.p_hat = config.oracle.p;
    report.trace_hat = config.oracle.trace;
    report.opnorm_hat = config.oracle.opnorm;
    report.split_sizes = {0, 0, 0, n};
  } else {
    // contiguous quarters in row order; remainder rows go to the leading quarters
    const std::size_t base = n / 4, rem = n % 4;
    std::array<std::size_t, 4> sizes{};
    for (std::size_t q = 0; q < 4; ++q) sizes[q] = base + (q < rem ? 1 : 0);
    report.split_sizes = sizes;
    const std::size_t q2_begin = sizes[0];
    const std::size_t q3_begin = q2_begin + sizes[1];
    const std::size_t q4_begin = q3_begin + sizes[2];

    const MaskedSample q1 = slice_rows(sample, 0, sizes[0]);
    const MaskedSample q2 = slice_rows(sample, q2_begin, sizes[1]);
    const MaskedSample q3 = slice_rows(sample, q3_begin, sizes[2]);

    report.p_hat = stage("estimate_p", [&] { return estimate_p(q1, config.delta); });
    report.trace_hat =
        stage("estimate_trace", [&] { return estimate_trace(q2, report.p_hat, config.delta); });
    report.opnorm_hat = stage("estimate_opnorm", [&] {
                          return estimate_opnorm(q3, report.p_hat, config.delta,
                                                 config.opnorm_constants, net,
                                                 stream_key(sample.seed, kStreamProbe));
                        }).opnorm;
    fit_begin = q4_begin;
    fit_count = sizes[3];
  }

  const std::span<const double> fit_rows{sample.y.data() + fit_begin * d, fit_count * d};
  const OracleEstimate fit = stage("oracle_estimate", [&] {
    return oracle_estimate(fit_rows, fit_count, d, config.delta, report.p_hat, report.trace_hat,
                           report.opnorm_hat, config.kappa, net);
  });
  report.lambda1 = fit.lambda1;
  report.lambda2 = fit.lambda2;
  report.sigma_hat = config.psd_project ? psd_projection(fit.sigma_hat) : fit.sigma_hat;

  const double r_hat = report.trace_hat / report.opnorm_hat;
  const double gate_floor =
      config.gate_constant * (r_hat + std::log(1.0 / config.delta)) / (report.p_hat * report.p_hat);
  report.gate_satisfied = static_cast<double>(fit_count) >= gate_floor;

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

SymmetricMatrix baseline_sample_second_moment(const MaskedSample& sample) {
  const std::size_t n = sample.n, d = sample.d;
  if (n == 0) throw std::invalid_argument("baseline_sample_second_moment: empty sample");
  SymmetricMatrix s(d);
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = sample.y.data() + r * d;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j <= i; ++j) s.ref(i, j) += row[i] * row[j];
  }
  s.scale(1.0 / static_cast<double>(n));
  return s;
}

SymmetricMatrix baseline_inverse_weighted(const MaskedSample& sample, double p_hat) {
  if (!(p_hat > 0.0 && p_hat <= 1.0))
    throw std::invalid_argument("baseline_inverse_weighted: p outside (0,1]");
  const SymmetricMatrix s = baseline_sample_second_moment(sample);
  SymmetricMatrix out(sample.d);
  out.add_scaled(s.diag_part(), 1.0 / p_hat);
  out.add_scaled(s.off_part(), 1.0 / (p_hat * p_hat));
  return out;
}

void write_report(std::ostream& out, const EstimatorReport& report,
                  const std::string& estimator_tag) {
  out << "estimator=" << estimator_tag << "\n";
  out << "d=" << report.sigma_hat.dim() << "\n";
  out << "p_hat=" << format_double(report.p_hat) << "\n";
  out << "trace_hat=" << format_double(report.trace_hat) << "\n";
  out << "opnorm_hat=" << format_double(report.opnorm_hat) << "\n";
  out << "lambda1=" << format_double(report.lambda1) << "\n";
  out << "lambda2=" << format_double(report.lambda2) << "\n";
  for (std::size_t q = 0; q < 4; ++q)
    out << "split_q" << (q + 1) << "=" << report.split_sizes[q] << "\n";
  out << "gate_satisfied=" << (report.gate_satisfied ? 1 : 0) << "\n";
  if (report.error_opnorm) out << "error_opnorm=" << format_double(*report.error_opnorm) << "\n";
  out << "wall_time=" << format_double(report.wall_seconds) << "\n";
  write_matrix(out, report.sigma_hat);
}

void save_report(const std::string& path, const EstimatorReport& report,
                 const std::string& estimator_tag) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  write_report(f, report, estimator_tag);
}

}  // namespace misscov
