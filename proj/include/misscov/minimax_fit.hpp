#pragma once

#include <vector>

#include "misscov/quadform.hpp"
#include "misscov/symmetric_matrix.hpp"

namespace misscov {

// min over theta of max_v |features_v . theta - targets_v|, optionally with
// theta >= 0 componentwise.
struct MinimaxProblem {
  std::size_t nvar = 0;
  std::size_t nrows = 0;
  std::vector<double> features;  // nrows * nvar
  std::vector<double> targets;   // nrows
  bool nonneg = false;
};

struct MinimaxSolution {
  std::vector<double> theta;
  double objective = 0.0;  // max residual evaluated directly at theta
  std::size_t iterations = 0;
};

double minimax_objective(const MinimaxProblem& p, const std::vector<double>& theta);

// Exact solve via a primal simplex on the LP dual; the basis is
// (nvar+1)x(nvar+1) regardless of how many directions the net carries.
// Deterministic pivoting (largest reduced cost, smallest-index ties, Bland
// fallback against cycling). Throws if the pivot cap is exceeded.
MinimaxSolution solve_minimax_linear(const MinimaxProblem& p);

// Projected subgradient with the fixed schedule eta_t = R/sqrt(t),
// R = 2*max|target|*dim_scale, 5000 iterations, best iterate returned.
// Kept as an independent reference route for tests and benchmarks; the
// production fits use the exact solver.
MinimaxSolution minimax_subgradient_reference(const MinimaxProblem& p, std::size_t dim_scale);

struct MinimaxFitResult {
  SymmetricMatrix matrix;
  double objective = 0.0;
  std::size_t iterations = 0;
};

MinimaxProblem diagonal_fit_problem(const TruncatedFormTable& table);
MinimaxProblem offdiagonal_fit_problem(const TruncatedFormTable& table);

// Best diagonal matrix with nonnegative entries under the table's sup metric.
MinimaxFitResult fit_diagonal(const TruncatedFormTable& table);
// Best symmetric matrix with exactly zero diagonal under the sup metric.
MinimaxFitResult fit_offdiagonal(const TruncatedFormTable& table);

}  // namespace misscov
