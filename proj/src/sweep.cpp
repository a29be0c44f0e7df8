#include "misscov/sweep.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "misscov/eigen_jacobi.hpp"
#include "misscov/rng.hpp"
#include "misscov/text_format.hpp"

namespace misscov {

std::string estimator_tag_name(EstimatorTag tag) {
  switch (tag) {
    case EstimatorTag::full:
      return "full";
    case EstimatorTag::oracle:
      return "oracle";
    case EstimatorTag::sample:
      return "sample";
    case EstimatorTag::inverse_weighted:
      return "inverse_weighted";
  }
  return "full";
}

EstimatorTag estimator_tag_parse(const std::string& name) {
  if (name == "full") return EstimatorTag::full;
  if (name == "oracle") return EstimatorTag::oracle;
  if (name == "sample") return EstimatorTag::sample;
  if (name == "inverse_weighted") return EstimatorTag::inverse_weighted;
  throw std::invalid_argument("unknown estimator '" + name +
                              "' (expected full|oracle|sample|inverse_weighted)");
}

void ExperimentConfig::validate() const {
  if (d == 0) throw std::invalid_argument("config: d must be >= 1");
  if (trials == 0) throw std::invalid_argument("config: trials must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("config: delta outside (0,1)");
  if (p_values.empty()) throw std::invalid_argument("config: p_values must be nonempty");
  for (double p : p_values)
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("config: every p must lie in (0,1]");
  if (n_values.empty()) throw std::invalid_argument("config: N_values must be nonempty");
  for (std::size_t n : n_values)
    if (n < 8) throw std::invalid_argument("config: every N must be >= 8");
  if (estimators.empty()) throw std::invalid_argument("config: estimators must be nonempty");
  if (dist == DistTag::student_t && !(dof > 4.0))
    throw std::invalid_argument("config: student_t requires dof > 4");
  if (kappa != 0.0 && !(kappa >= 1.0))
    throw std::invalid_argument("config: kappa must be >= 1 (or 0 for the analytic value)");
  if (!(gate_constant > 0.0)) throw std::invalid_argument("config: gate_constant must be > 0");
  if (threads < 0) throw std::invalid_argument("config: threads must be >= 0");
  opnorm_constants.validate();
}

double ExperimentConfig::resolved_kappa() const {
  return kappa != 0.0 ? kappa : analytic_kappa(dist, dof);
}

bool TrialRecord::operator<(const TrialRecord& o) const {
  if (estimator != o.estimator) return estimator < o.estimator;
  if (p != o.p) return p < o.p;
  if (n != o.n) return n < o.n;
  return trial < o.trial;
}

std::uint64_t trial_seed(std::uint64_t master_seed, double p, std::size_t n, std::size_t trial) {
  std::uint64_t h = mix64(master_seed + kGolden);
  h = mix64(h ^ std::bit_cast<std::uint64_t>(p));
  h = mix64(h ^ static_cast<std::uint64_t>(n));
  h = mix64(h ^ static_cast<std::uint64_t>(trial));
  return h;
}

namespace {

EstimatorConfig pipeline_config(const ExperimentConfig& cfg, EstimatorMode mode,
                                const CovarianceSpec& sigma, double p) {
  EstimatorConfig pc;
  pc.delta = cfg.delta;
  pc.kappa = cfg.resolved_kappa();
  pc.net_extra_random = cfg.net_extra_random;
  pc.opnorm_constants = cfg.opnorm_constants;
  pc.psd_project = cfg.psd_project;
  pc.gate_constant = cfg.gate_constant;
  pc.mode = mode;
  if (mode == EstimatorMode::oracle) {
    pc.oracle.p = p;
    pc.oracle.trace = sigma.summary.trace;
    pc.oracle.opnorm = sigma.summary.operator_norm;
  }
  return pc;
}

TrialRecord run_one(const ExperimentConfig& cfg, const CovarianceSpec& sigma, EstimatorTag tag,
                    const MaskedSample& sample, double p, std::size_t n, std::size_t trial,
                    std::uint64_t seed) {
  TrialRecord rec;
  rec.estimator = tag;
  rec.d = cfg.d;
  rec.p = p;
  rec.n = n;
  rec.trial = trial;
  rec.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    SymmetricMatrix estimate;
    switch (tag) {
      case EstimatorTag::full: {
        const EstimatorReport rep =
            estimate_covariance(sample, pipeline_config(cfg, EstimatorMode::full, sigma, p));
        estimate = rep.sigma_hat;
        rec.p_hat = rep.p_hat;
        rec.trace_hat = rep.trace_hat;
        rec.opnorm_hat = rep.opnorm_hat;
        rec.lambda1 = rep.lambda1;
        rec.lambda2 = rep.lambda2;
        rec.gate_satisfied = rep.gate_satisfied;
        break;
      }
      case EstimatorTag::oracle: {
        const EstimatorReport rep =
            estimate_covariance(sample, pipeline_config(cfg, EstimatorMode::oracle, sigma, p));
        estimate = rep.sigma_hat;
        rec.p_hat = rep.p_hat;
        rec.trace_hat = rep.trace_hat;
        rec.opnorm_hat = rep.opnorm_hat;
        rec.lambda1 = rep.lambda1;
        rec.lambda2 = rep.lambda2;
        rec.gate_satisfied = rep.gate_satisfied;
        break;
      }
      case EstimatorTag::sample:
        estimate = baseline_sample_second_moment(sample);
        break;
      case EstimatorTag::inverse_weighted: {
        // full-sample p estimate: the strongest fair version of the baseline
        rec.p_hat = estimate_p(sample, cfg.delta);
        estimate = baseline_inverse_weighted(sample, rec.p_hat);
        break;
      }
    }
    rec.error_opnorm = operator_norm(estimate - sigma.sigma);
  } catch (const std::exception&) {
    rec.failed = true;
    rec.error_opnorm = std::numeric_limits<double>::quiet_NaN();
    rec.p_hat = rec.trace_hat = rec.opnorm_hat = std::numeric_limits<double>::quiet_NaN();
    rec.lambda1 = rec.lambda2 = std::numeric_limits<double>::quiet_NaN();
  }
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

}  // namespace

std::vector<TrialRecord> run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const CovarianceSpec sigma = build_covariance(cfg.d, cfg.spectrum, cfg.rotation_seed);

  struct Cell {
    double p;
    std::size_t n;
    std::size_t trial;
  };
  std::vector<Cell> cells;
  cells.reserve(cfg.p_values.size() * cfg.n_values.size() * cfg.trials);
  for (double p : cfg.p_values)
    for (std::size_t n : cfg.n_values)
      for (std::size_t t = 0; t < cfg.trials; ++t) cells.push_back({p, n, t});

  std::vector<std::vector<TrialRecord>> per_cell(cells.size());

#ifdef _OPENMP
  const int requested = cfg.threads;
  const int previous = omp_get_max_threads();
  if (requested > 0) omp_set_num_threads(requested);
#endif
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(cells.size()); ++c) {
    const Cell& cell = cells[c];
    const std::uint64_t seed = trial_seed(cfg.master_seed, cell.p, cell.n, cell.trial);
    std::vector<TrialRecord>& out = per_cell[c];
    try {
      const MaskedSample sample =
          generate_masked_sample(sigma, cfg.dist, cfg.dof, cell.p, cell.n, seed);
      for (EstimatorTag tag : cfg.estimators)
        out.push_back(run_one(cfg, sigma, tag, sample, cell.p, cell.n, cell.trial, seed));
    } catch (const std::exception&) {
      for (EstimatorTag tag : cfg.estimators) {
        TrialRecord rec;
        rec.estimator = tag;
        rec.d = cfg.d;
        rec.p = cell.p;
        rec.n = cell.n;
        rec.trial = cell.trial;
        rec.seed = seed;
        rec.failed = true;
        rec.error_opnorm = std::numeric_limits<double>::quiet_NaN();
        out.push_back(rec);
      }
    }
  }
#ifdef _OPENMP
  if (requested > 0) omp_set_num_threads(previous);
#endif

  std::vector<TrialRecord> records;
  records.reserve(cells.size() * cfg.estimators.size());
  for (const auto& chunk : per_cell) records.insert(records.end(), chunk.begin(), chunk.end());
  std::sort(records.begin(), records.end());
  if (!cfg.record_timing)
    for (TrialRecord& r : records) r.wall_seconds = 0.0;
  return records;
}

std::string records_to_csv(const std::vector<TrialRecord>& records) {
  std::ostringstream out;
  out << "estimator,d,p,N,trial,seed,error_opnorm,p_hat,trace_hat,opnorm_hat,lambda1,lambda2,"
         "gate_satisfied,wall_time\n";
  for (const TrialRecord& r : records) {
    out << estimator_tag_name(r.estimator) << ',' << r.d << ',' << format_double(r.p) << ','
        << r.n << ',' << r.trial << ',' << r.seed << ',';
    if (r.failed)
      out << "FAILED";
    else
      out << format_double(r.error_opnorm);
    auto num = [&](double v) {
      out << ',';
      if (std::isnan(v))
        out << "nan";
      else
        out << format_double(v);
    };
    num(r.p_hat);
    num(r.trace_hat);
    num(r.opnorm_hat);
    num(r.lambda1);
    num(r.lambda2);
    out << ',' << (r.gate_satisfied ? 1 : 0) << ',' << format_double(r.wall_seconds) << "\n";
  }
  return out.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_maybe_nan(const std::string& s) {
  if (s == "nan" || s == "FAILED") return std::numeric_limits<double>::quiet_NaN();
  return parse_double(s);
}

}  // namespace

std::vector<TrialRecord> records_from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("records csv: missing header");
  std::vector<TrialRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 14) {
      std::ostringstream msg;
      msg << "records csv line " << lineno << ": expected 14 fields, got " << f.size();
      throw std::runtime_error(msg.str());
    }
    TrialRecord r;
    r.estimator = estimator_tag_parse(f[0]);
    r.d = parse_u64(f[1]);
    r.p = parse_double(f[2]);
    r.n = parse_u64(f[3]);
    r.trial = parse_u64(f[4]);
    r.seed = parse_u64(f[5]);
    r.failed = f[6] == "FAILED";
    r.error_opnorm = parse_maybe_nan(f[6]);
    r.p_hat = parse_maybe_nan(f[7]);
    r.trace_hat = parse_maybe_nan(f[8]);
    r.opnorm_hat = parse_maybe_nan(f[9]);
    r.lambda1 = parse_maybe_nan(f[10]);
    r.lambda2 = parse_maybe_nan(f[11]);
    r.gate_satisfied = f[12] == "1";
    r.wall_seconds = parse_double(f[13]);
    records.push_back(r);
  }
  return records;
}

std::vector<TrialRecord> load_records_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  return records_from_csv(f);
}

namespace {

double quantile_sorted(const std::vector<double>& xs, double q) {
  // nearest-rank on a sorted sample
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return xs[lo] * (1.0 - frac) + xs[hi] * frac;
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t k = xs.size();
  if (k == 0) return std::numeric_limits<double>::quiet_NaN();
  return k % 2 == 1 ? xs[k / 2] : 0.5 * (xs[k / 2 - 1] + xs[k / 2]);
}

}  // namespace

std::string summary_to_csv(const std::vector<TrialRecord>& records) {
  struct Key {
    EstimatorTag tag;
    double p;
    std::size_t n;
    bool operator<(const Key& o) const {
      if (tag != o.tag) return tag < o.tag;
      if (p != o.p) return p < o.p;
      return n < o.n;
    }
  };
  std::map<Key, std::pair<std::vector<double>, std::size_t>> cells;
  for (const TrialRecord& r : records) {
    auto& cell = cells[{r.estimator, r.p, r.n}];
    if (r.failed)
      ++cell.second;
    else
      cell.first.push_back(r.error_opnorm);
  }
  std::ostringstream out;
  out << "estimator,p,N,trials,q50,q90,q95,failures\n";
  for (auto& [key, cell] : cells) {
    std::sort(cell.first.begin(), cell.first.end());
    out << estimator_tag_name(key.tag) << ',' << format_double(key.p) << ',' << key.n << ','
        << (cell.first.size() + cell.second) << ',' << format_double(quantile_sorted(cell.first, 0.5))
        << ',' << format_double(quantile_sorted(cell.first, 0.9)) << ','
        << format_double(quantile_sorted(cell.first, 0.95)) << ',' << cell.second << "\n";
  }
  return out.str();
}

RateFit fit_rate(const std::vector<TrialRecord>& records, SweepAxis axis, EstimatorTag tag) {
  std::map<double, std::vector<double>> groups;
  for (const TrialRecord& r : records) {
    if (r.estimator != tag || r.failed) continue;
    const double x = axis == SweepAxis::n ? static_cast<double>(r.n) : r.p;
    groups[x].push_back(r.error_opnorm);
  }
  if (groups.size() < 3)
    throw std::runtime_error("fit_rate: need at least 3 distinct axis values");

  std::vector<double> lx, ly;
  for (auto& [x, errs] : groups) {
    const double med = median(errs);
    if (!(med > 0.0)) throw std::runtime_error("fit_rate: nonpositive median error");
    lx.push_back(std::log(x));
    ly.push_back(std::log(med));
  }
  const auto k = static_cast<double>(lx.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
    syy += ly[i] * ly[i];
  }
  const double var_x = sxx - sx * sx / k;
  if (!(var_x > 1e-12)) throw std::runtime_error("fit_rate: degenerate axis range");
  RateFit fit;
  fit.slope = (sxy - sx * sy / k) / var_x;
  fit.intercept = (sy - fit.slope * sx) / k;
  const double ss_tot = syy - sy * sy / k;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double resid = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss_res += resid * resid;
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace misscov
