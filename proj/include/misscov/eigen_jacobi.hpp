#pragma once

#include <vector>

#include "misscov/symmetric_matrix.hpp"

namespace misscov {

struct EighResult {
  std::vector<double> eigenvalues;   // descending
  std::vector<double> eigenvectors;  // row-major d*d; column k pairs with eigenvalue k
};

// Cyclic Jacobi eigendecomposition. Stops when the off-diagonal Frobenius norm
// drops below 1e-12 * max(1, ||M||_F); throws after 100*d^2 rotations without
// convergence. Eigenvector signs are normalized (largest-magnitude component
// nonnegative) so results are reproducible.
EighResult eigh(const SymmetricMatrix& m);

// Largest absolute eigenvalue.
double operator_norm(const SymmetricMatrix& m);

struct SpectralSummary {
  double operator_norm = 0.0;
  double trace = 0.0;
  double effective_rank = 0.0;  // trace / operator_norm
  std::vector<double> eigenvalues;
};

// Throws "degenerate covariance" when operator_norm(m) == 0.
SpectralSummary spectral_summary(const SymmetricMatrix& m);

}  // namespace misscov
