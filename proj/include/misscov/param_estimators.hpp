#pragma once

#include <cstdint>
#include <span>

#include "misscov/direction_net.hpp"
#include "misscov/sampling.hpp"

namespace misscov {

// Level constants for the operator-norm profile. C1 and c_beta only document
// the analysis behind the defaults; the runtime uses target_level = 1.1*L2,
// which must stay below 1.
struct OpNormConstants {
  double C1 = 0.1;
  double L1 = 0.5;
  double L2 = 0.5;
  double c_beta = 1.0;

  double target_level() const { return 1.1 * L2; }
  void validate() const;
};

// Fraction of observed entries via the row statistic ||z_i||_1 / d where
// z_i(j) = [y_ij != 0], fed through the sub-Gaussian mean estimator and
// clamped to (0, 1].
double estimate_p(const MaskedSample& sample, double delta);

// robust_mean of the per-row squared norms divided by p_hat; positive or
// throws.
double estimate_trace(const MaskedSample& sample, double p_hat, double delta);

// Profile value
//   g(alpha) = (1/(n*p)) sup_v sum_i psi(alpha^2 q_diag_i(v))
//            + (1/(n*p^2)) sup_{v (or 0)} sum_i psi(alpha^2 q_off_i(v)),
// where the off supremum is floored at 0 when net_off.includes_zero. Literal
// per-sample transcription; estimate_opnorm uses an equivalent sorted-form
// evaluation internally.
double opnorm_diagnostic(double alpha, const MaskedSample& sample, double p_hat,
                         const DirectionNet& net_diag, const DirectionNet& net_off);

struct OpnormEstimate {
  double opnorm = 0.0;     // alpha_hat^{-2}
  double alpha_hat = 0.0;  // first crossing of the target level
  double alpha_hi = 0.0;   // scan endpoint derived from the probe vector
  std::size_t probe_draws = 0;
};

// Level-crossing estimator: draw a unit probe w (re-drawn until every nonzero
// row has <y_i, w> != 0), set alpha_hi from the smallest nonzero |form| along
// w, locate the first crossing of target_level by a factor-2 scan from
// alpha_hi*1e-8 followed by 60 bisection steps. The probe is appended to the
// net so the profile inherits the alpha_hi bracket guarantee. The confidence
// level does not enter the computation (the guarantee is a constant-factor
// band); it is accepted for interface symmetry with the other estimators.
OpnormEstimate estimate_opnorm(const MaskedSample& sample, double p_hat, double delta,
                               const OpNormConstants& constants, const DirectionNet& net,
                               std::uint64_t probe_seed);

}  // namespace misscov
