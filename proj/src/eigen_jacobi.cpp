#include "misscov/eigen_jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace misscov {

namespace {

double off_diagonal_frobenius(const std::vector<double>& a, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) s += 2.0 * a[i * d + j] * a[i * d + j];
  return std::sqrt(s);
}

}  // namespace

EighResult eigh(const SymmetricMatrix& m) {
  const std::size_t d = m.dim();
  if (d == 0) throw std::invalid_argument("eigh: empty matrix");
  if (!m.is_finite()) throw std::invalid_argument("eigh: non-finite entries");

  std::vector<double> a = m.to_dense();
  std::vector<double> v(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) v[i * d + i] = 1.0;

  const double tol = 1e-12 * std::max(1.0, m.frobenius_norm());
  const std::size_t rotation_cap = 100 * d * d;
  std::size_t rotations = 0;

  while (off_diagonal_frobenius(a, d) > tol) {
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = a[p * d + q];
        if (apq == 0.0) continue;
        if (++rotations > rotation_cap)
          throw std::runtime_error("eigh: Jacobi iteration cap exceeded without convergence");

        const double app = a[p * d + p];
        const double aqq = a[q * d + q];
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                      : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        for (std::size_t k = 0; k < d; ++k) {
          const double akp = a[k * d + p];
          const double akq = a[k * d + q];
          a[k * d + p] = c * akp - s * akq;
          a[k * d + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double apk = a[p * d + k];
          const double aqk = a[q * d + k];
          a[p * d + k] = c * apk - s * aqk;
          a[q * d + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double vkp = v[k * d + p];
          const double vkq = v[k * d + q];
          v[k * d + p] = c * vkp - s * vkq;
          v[k * d + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a[x * d + x] > a[y * d + y]; });

  EighResult r;
  r.eigenvalues.resize(d);
  r.eigenvectors.assign(d * d, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    const std::size_t src = order[k];
    r.eigenvalues[k] = a[src * d + src];
    // sign convention: largest-magnitude component nonnegative
    std::size_t arg = 0;
    double best = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double mag = std::abs(v[i * d + src]);
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    const double sign = (v[arg * d + src] >= 0.0) ? 1.0 : -1.0;
    for (std::size_t i = 0; i < d; ++i) r.eigenvectors[i * d + k] = sign * v[i * d + src];
  }
  return r;
}

double operator_norm(const SymmetricMatrix& m) {
  const EighResult r = eigh(m);
  double best = 0.0;
  for (double lam : r.eigenvalues) best = std::max(best, std::abs(lam));
  return best;
}

SpectralSummary spectral_summary(const SymmetricMatrix& m) {
  const EighResult r = eigh(m);
  SpectralSummary s;
  s.eigenvalues = r.eigenvalues;
  for (double lam : r.eigenvalues) {
    s.trace += lam;
    s.operator_norm = std::max(s.operator_norm, std::abs(lam));
  }
  if (s.operator_norm <= 0.0) throw std::runtime_error("spectral_summary: degenerate covariance");
  s.effective_rank = s.trace / s.operator_norm;
  return s;
}

}  // namespace misscov
