#pragma once

#include "misscov/minimax_fit.hpp"
#include "misscov/quadform.hpp"
#include "misscov/symmetric_matrix.hpp"

namespace misscov {

struct Lambdas {
  double lambda1 = 0.0;  // diagonal truncation level
  double lambda2 = 0.0;  // off-diagonal truncation level
};

// Truncation levels from the effective rank r = trace/opnorm:
//   lambda1 = (n*p)^{-1/2} * opnorm^{-1} * kappa^{-2} * sqrt(r + ln(1/delta))
//   lambda2 =  n^{-1/2} * (p*opnorm)^{-1} * kappa^{-2} * sqrt(r + ln(1/delta))
Lambdas pick_lambdas(double trace_hat, double opnorm_hat, double p_hat, std::size_t n,
                     double delta, double kappa);

struct OracleEstimate {
  SymmetricMatrix sigma_hat;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double fit_objective_diag = 0.0;
  double fit_objective_off = 0.0;
};

// Covariance estimate assuming p, trace and operator norm are known:
// sigma_hat = p^{-1} * diagonal_fit(lambda1) + p^{-2} * offdiagonal_fit(lambda2).
OracleEstimate oracle_estimate(std::span<const double> y, std::size_t n, std::size_t d,
                               double delta, double p, double trace, double opnorm, double kappa,
                               const DirectionNet& net);

}  // namespace misscov
