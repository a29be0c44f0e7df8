#include "misscov/oracle_estimator.hpp"

#include <cmath>
#include <stdexcept>

namespace misscov {

Lambdas pick_lambdas(double trace_hat, double opnorm_hat, double p_hat, std::size_t n,
                     double delta, double kappa) {
  if (!(trace_hat > 0.0) || !(opnorm_hat > 0.0))
    throw std::invalid_argument("pick_lambdas: trace and opnorm must be positive");
  if (!(p_hat > 0.0 && p_hat <= 1.0)) throw std::invalid_argument("pick_lambdas: p outside (0,1]");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("pick_lambdas: delta outside (0,1)");
  if (!(kappa >= 1.0)) throw std::invalid_argument("pick_lambdas: kappa must be >= 1");
  if (n == 0) throw std::invalid_argument("pick_lambdas: empty sample");

  const double r = trace_hat / opnorm_hat;
  const double tail = std::sqrt(r + std::log(1.0 / delta));
  const double inv_kappa_sq = 1.0 / (kappa * kappa);
  const double n_real = static_cast<double>(n);
  Lambdas l;
  l.lambda1 = tail * inv_kappa_sq / (std::sqrt(n_real * p_hat) * opnorm_hat);
  l.lambda2 = tail * inv_kappa_sq / (std::sqrt(n_real) * p_hat * opnorm_hat);
  return l;
}

OracleEstimate oracle_estimate(std::span<const double> y, std::size_t n, std::size_t d,
                               double delta, double p, double trace, double opnorm, double kappa,
                               const DirectionNet& net) {
  const Lambdas l = pick_lambdas(trace, opnorm, p, n, delta, kappa);

  const TruncatedFormTable diag_table =
      truncated_form(y, n, d, MatrixPart::diagonal, l.lambda1, net);
  const TruncatedFormTable off_table =
      truncated_form(y, n, d, MatrixPart::offdiagonal, l.lambda2, net);
  const MinimaxFitResult diag_fit = fit_diagonal(diag_table);
  const MinimaxFitResult off_fit = fit_offdiagonal(off_table);

  OracleEstimate e;
  e.lambda1 = l.lambda1;
  e.lambda2 = l.lambda2;
  e.fit_objective_diag = diag_fit.objective;
  e.fit_objective_off = off_fit.objective;
  e.sigma_hat = SymmetricMatrix(d);
  e.sigma_hat.add_scaled(diag_fit.matrix, 1.0 / p);
  e.sigma_hat.add_scaled(off_fit.matrix, 1.0 / (p * p));
  return e;
}

}  // namespace misscov
