#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace misscov {

// Dense symmetric matrix stored as the packed lower triangle, so symmetry
// cannot be broken by construction. Entry (i,j) with j <= i lives at
// i*(i+1)/2 + j.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(std::size_t dim) : dim_(dim), a_(dim * (dim + 1) / 2, 0.0) {}

  static SymmetricMatrix identity(std::size_t dim);
  // Builds from a row-major dense d*d array; caller guarantees symmetry (the
  // lower triangle is taken as-is).
  static SymmetricMatrix from_dense_lower(std::size_t dim, std::span<const double> dense);

  std::size_t dim() const { return dim_; }

  double operator()(std::size_t i, std::size_t j) const {
    return j <= i ? a_[i * (i + 1) / 2 + j] : a_[j * (j + 1) / 2 + i];
  }
  double& ref(std::size_t i, std::size_t j) {
    return j <= i ? a_[i * (i + 1) / 2 + j] : a_[j * (j + 1) / 2 + i];
  }

  const std::vector<double>& packed() const { return a_; }
  std::vector<double>& packed() { return a_; }

  bool is_finite() const;
  double trace() const;
  double frobenius_norm() const;
  double max_abs() const;

  SymmetricMatrix diag_part() const;
  SymmetricMatrix off_part() const;

  // this += scale * other
  void add_scaled(const SymmetricMatrix& other, double scale);
  void scale(double factor);

  std::vector<double> to_dense() const;  // row-major d*d
  void matvec(std::span<const double> x, std::span<double> out) const;
  double quadratic_form(std::span<const double> v) const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> a_;
};

SymmetricMatrix operator-(const SymmetricMatrix& a, const SymmetricMatrix& b);

inline SymmetricMatrix diag_part(const SymmetricMatrix& m) { return m.diag_part(); }
inline SymmetricMatrix off_part(const SymmetricMatrix& m) { return m.off_part(); }

}  // namespace misscov
