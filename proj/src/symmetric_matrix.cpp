#include "misscov/symmetric_matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace misscov {

SymmetricMatrix SymmetricMatrix::identity(std::size_t dim) {
  SymmetricMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m.ref(i, i) = 1.0;
  return m;
}

SymmetricMatrix SymmetricMatrix::from_dense_lower(std::size_t dim, std::span<const double> dense) {
  if (dense.size() != dim * dim) throw std::invalid_argument("from_dense_lower: size mismatch");
  SymmetricMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j <= i; ++j) m.ref(i, j) = dense[i * dim + j];
  return m;
}

bool SymmetricMatrix::is_finite() const {
  for (double v : a_)
    if (!std::isfinite(v)) return false;
  return true;
}

double SymmetricMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
  return t;
}

double SymmetricMatrix::frobenius_norm() const {
  double s = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double v = (*this)(i, j);
      s += 2.0 * v * v;
    }
    const double dgn = (*this)(i, i);
    s += dgn * dgn;
  }
  return std::sqrt(s);
}

double SymmetricMatrix::max_abs() const {
  double m = 0.0;
  for (double v : a_) m = std::max(m, std::abs(v));
  return m;
}

SymmetricMatrix SymmetricMatrix::diag_part() const {
  SymmetricMatrix m(dim_);
  for (std::size_t i = 0; i < dim_; ++i) m.ref(i, i) = (*this)(i, i);
  return m;
}

SymmetricMatrix SymmetricMatrix::off_part() const {
  SymmetricMatrix m(*this);
  for (std::size_t i = 0; i < dim_; ++i) m.ref(i, i) = 0.0;
  return m;
}

void SymmetricMatrix::add_scaled(const SymmetricMatrix& other, double scale) {
  if (other.dim_ != dim_) throw std::invalid_argument("add_scaled: dimension mismatch");
  for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += scale * other.a_[k];
}

void SymmetricMatrix::scale(double factor) {
  for (double& v : a_) v *= factor;
}

std::vector<double> SymmetricMatrix::to_dense() const {
  std::vector<double> d(dim_ * dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) d[i * dim_ + j] = (*this)(i, j);
  return d;
}

void SymmetricMatrix::matvec(std::span<const double> x, std::span<double> out) const {
  if (x.size() != dim_ || out.size() != dim_) throw std::invalid_argument("matvec: size mismatch");
  for (std::size_t i = 0; i < dim_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) s += (*this)(i, j) * x[j];
    out[i] = s;
  }
}

double SymmetricMatrix::quadratic_form(std::span<const double> v) const {
  if (v.size() != dim_) throw std::invalid_argument("quadratic_form: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) row += (*this)(i, j) * v[j];
    s += v[i] * row;
  }
  return s;
}

SymmetricMatrix operator-(const SymmetricMatrix& a, const SymmetricMatrix& b) {
  SymmetricMatrix r(a);
  r.add_scaled(b, -1.0);
  return r;
}

}  // namespace misscov
