#include "misscov/param_estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "misscov/quadform.hpp"
#include "misscov/rng.hpp"
#include "misscov/robust_mean.hpp"
#include "misscov/truncation.hpp"

namespace misscov {

void OpNormConstants::validate() const {
  if (!(C1 > 0.0 && L1 > 0.0 && L2 > 0.0 && c_beta > 0.0))
    throw std::invalid_argument("opnorm constants must be positive");
  if (!(1.1 * L2 < 1.0))
    throw std::invalid_argument("opnorm constants require 1.1*L2 < 1");
}

double estimate_p(const MaskedSample& sample, double delta) {
  const std::size_t n = sample.n, d = sample.d;
  if (n == 0 || d == 0) throw std::invalid_argument("estimate_p: empty sample");
  bool any_nonzero = false;
  std::vector<double> rates(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t nonzero = 0;
    for (std::size_t j = 0; j < d; ++j) nonzero += sample.y[i * d + j] != 0.0 ? 1 : 0;
    any_nonzero |= nonzero != 0;
    rates[i] = static_cast<double>(nonzero) / static_cast<double>(d);
  }
  if (!any_nonzero) throw std::runtime_error("estimate_p: cannot identify p (all-zero data)");
  double p_hat = robust_mean(rates, delta);
  if (p_hat > 1.0) p_hat = 1.0;  // estimates above 1 are safely clamped
  if (!(p_hat > 0.0)) throw std::runtime_error("estimate_p: cannot identify p");
  return p_hat;
}

double estimate_trace(const MaskedSample& sample, double p_hat, double delta) {
  if (!(p_hat > 0.0 && p_hat <= 1.0)) throw std::invalid_argument("estimate_trace: p outside (0,1]");
  const std::size_t n = sample.n, d = sample.d;
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double v = sample.y[i * d + j];
      s += v * v;
    }
    norms[i] = s;
  }
  const double trace_hat = robust_mean(norms, delta) / p_hat;
  if (!(trace_hat > 0.0)) throw std::runtime_error("estimate_trace: nonpositive trace estimate");
  return trace_hat;
}

double opnorm_diagnostic(double alpha, const MaskedSample& sample, double p_hat,
                         const DirectionNet& net_diag, const DirectionNet& net_off) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("opnorm_diagnostic: alpha must be >= 0");
  if (!(p_hat > 0.0 && p_hat <= 1.0))
    throw std::invalid_argument("opnorm_diagnostic: p outside (0,1]");
  const std::size_t n = sample.n, d = sample.d;
  const double s = alpha * alpha;
  const std::vector<double> ysq = detail::squared_rows(sample.y);

  auto sup_part = [&](const DirectionNet& net, MatrixPart part) {
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> q(n);
    for (std::size_t k = 0; k < net.count; ++k) {
      detail::direction_forms(sample.y, ysq, n, d, part, net.vec(k), q);
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += psi(std::clamp(s * q[i], -1e15, 1e15));
      best = std::max(best, acc);
    }
    if (net.includes_zero) best = std::max(best, 0.0);
    return best;
  };

  const double diag_sup = sup_part(net_diag, MatrixPart::diagonal);
  const double off_sup = sup_part(net_off, MatrixPart::offdiagonal);
  const double n_real = static_cast<double>(n);
  return diag_sup / (n_real * p_hat) + off_sup / (n_real * p_hat * p_hat);
}

namespace {

// g from sorted-form tables; the probe direction sits at index net.count.
double profile_from_tables(double alpha, const SortedFormTable& diag, const SortedFormTable& off,
                           double p_hat, bool floor_off_at_zero) {
  const double s = alpha * alpha;
  double diag_sup = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < diag.directions; ++k)
    diag_sup = std::max(diag_sup, diag.sum_psi(k, s));
  double off_sup = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < off.directions; ++k) off_sup = std::max(off_sup, off.sum_psi(k, s));
  if (floor_off_at_zero) off_sup = std::max(off_sup, 0.0);
  const double n_real = static_cast<double>(diag.n);
  return diag_sup / (n_real * p_hat) + off_sup / (n_real * p_hat * p_hat);
}

}  // namespace

OpnormEstimate estimate_opnorm(const MaskedSample& sample, double p_hat, double delta,
                               const OpNormConstants& constants, const DirectionNet& net,
                               std::uint64_t probe_seed) {
  (void)delta;
  constants.validate();
  if (!(p_hat > 0.0 && p_hat <= 1.0))
    throw std::invalid_argument("estimate_opnorm: p outside (0,1]");
  const std::size_t n = sample.n, d = sample.d;
  if (n == 0) throw std::invalid_argument("estimate_opnorm: empty sample");

  const std::vector<double> ysq = detail::squared_rows(sample.y);

  // Probe vector: normalized Gaussian, re-drawn until every nonzero row has a
  // nonzero inner product with it. Continuous data makes retries measure-zero.
  Rng rng(probe_seed);
  std::vector<double> w(d);
  std::size_t draws = 0;
  bool valid = false;
  while (!valid) {
    if (++draws > 100) throw std::runtime_error("estimate_opnorm: no valid probe direction found");
    double norm_sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      w[j] = rng.normal();
      norm_sq += w[j] * w[j];
    }
    if (norm_sq < 1e-24) continue;
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double& x : w) x *= inv;
    valid = true;
    for (std::size_t i = 0; i < n && valid; ++i) {
      bool row_nonzero = false;
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        row_nonzero |= sample.y[i * d + j] != 0.0;
        dot += sample.y[i * d + j] * w[j];
      }
      if (row_nonzero && dot == 0.0) valid = false;
    }
  }

  // Smallest nonzero |form| along the probe fixes the scan endpoint:
  // alpha_hi^2 * |form| >= 1 for every contributing row, so the profile there
  // is at least ~1 > target_level.
  double min_form = std::numeric_limits<double>::infinity();
  {
    std::vector<double> qd(n), qo(n);
    detail::direction_forms(sample.y, ysq, n, d, MatrixPart::diagonal, w, qd);
    detail::direction_forms(sample.y, ysq, n, d, MatrixPart::offdiagonal, w, qo);
    for (std::size_t i = 0; i < n; ++i) {
      if (qd[i] != 0.0) min_form = std::min(min_form, std::abs(qd[i]));
      if (qo[i] != 0.0) min_form = std::min(min_form, std::abs(qo[i]));
    }
  }
  if (!std::isfinite(min_form))
    throw std::runtime_error("estimate_opnorm: all quadratic forms vanish (all-zero data?)");

  const SortedFormTable diag_tbl =
      build_sorted_forms(sample.y, n, d, MatrixPart::diagonal, net, w);
  const SortedFormTable off_tbl =
      build_sorted_forms(sample.y, n, d, MatrixPart::offdiagonal, net, w);

  auto profile = [&](double alpha) {
    return profile_from_tables(alpha, diag_tbl, off_tbl, p_hat, /*floor_off_at_zero=*/true);
  };

  const double level = constants.target_level();
  const double alpha_hi = std::sqrt(1.0 / min_form);
  const double alpha_lo = alpha_hi * 1e-8;

  // bracket the first crossing from below
  double lo = 0.0, hi = 0.0;
  if (profile(alpha_lo) >= level) {
    lo = 0.0;  // profile(0) = 0 < level
    hi = alpha_lo;
  } else {
    double prev = alpha_lo;
    bool found = false;
    for (double alpha = alpha_lo * 2.0; alpha < alpha_hi; alpha *= 2.0) {
      if (profile(alpha) >= level) {
        lo = prev;
        hi = alpha;
        found = true;
        break;
      }
      prev = alpha;
    }
    if (!found) {
      if (profile(alpha_hi) >= level) {
        lo = prev;
        hi = alpha_hi;
      } else {
        throw std::runtime_error("estimate_opnorm: opnorm root-finding failed (no crossing)");
      }
    }
  }

  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (profile(mid) >= level)
      hi = mid;
    else
      lo = mid;
  }

  OpnormEstimate est;
  est.alpha_hat = 0.5 * (lo + hi);
  est.alpha_hi = alpha_hi;
  est.probe_draws = draws;
  est.opnorm = 1.0 / (est.alpha_hat * est.alpha_hat);
  if (!(est.opnorm > 0.0) || !std::isfinite(est.opnorm))
    throw std::runtime_error("estimate_opnorm: degenerate estimate");
  return est;
}

}  // namespace misscov
