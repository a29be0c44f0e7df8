#pragma once

#include <span>
#include <vector>

#include "misscov/direction_net.hpp"

namespace misscov {

enum class MatrixPart { diagonal, offdiagonal };

// Per-direction averages of the truncated per-sample quadratic forms:
// value(v) = (1/(n*lambda)) * sum_i psi(lambda * q_i(v)) with
//   q_i(v) = sum_j y_ij^2 v_j^2                      (diagonal part)
//   q_i(v) = <y_i, v>^2 - sum_j y_ij^2 v_j^2         (off-diagonal part)
// so no d*d matrix is materialized per sample.
struct TruncatedFormTable {
  const DirectionNet* net = nullptr;  // non-owning; must outlive the table
  MatrixPart part = MatrixPart::diagonal;
  double lambda = 0.0;
  std::vector<double> values;  // one per net direction
};

// OpenMP over directions; each direction is an independent serial sum, so the
// result is bit-identical to the serial variant.
TruncatedFormTable truncated_form(std::span<const double> y, std::size_t n, std::size_t d,
                                  MatrixPart part, double lambda, const DirectionNet& net);
TruncatedFormTable truncated_form_serial(std::span<const double> y, std::size_t n, std::size_t d,
                                         MatrixPart part, double lambda, const DirectionNet& net);

// Per-direction sorted quadratic forms plus prefix sums. Lets the
// operator-norm profile sum_i psi(s * q_i) be evaluated in O(log n) per
// direction for any truncation scale s >= 0.
struct SortedFormTable {
  std::size_t directions = 0;
  std::size_t n = 0;
  std::vector<double> sorted;  // directions*n, ascending within a direction
  std::vector<double> prefix;  // directions*(n+1)

  double sum_psi(std::size_t dir, double s) const;
};

// Forms for every net direction plus (optionally) one extra probe direction
// appended at index net.count.
SortedFormTable build_sorted_forms(std::span<const double> y, std::size_t n, std::size_t d,
                                   MatrixPart part, const DirectionNet& net,
                                   std::span<const double> extra_direction = {});
SortedFormTable build_sorted_forms_serial(std::span<const double> y, std::size_t n, std::size_t d,
                                          MatrixPart part, const DirectionNet& net,
                                          std::span<const double> extra_direction = {});

namespace detail {

// Entrywise squares of y, shared across directions.
std::vector<double> squared_rows(std::span<const double> y);

// sum_i psi(clamped lambda*q_i(v)) / (n*lambda) for one direction.
double truncated_direction_value(std::span<const double> y, const std::vector<double>& ysq,
                                 std::size_t n, std::size_t d, MatrixPart part, double lambda,
                                 std::span<const double> v);

// Raw q_i(v) for one direction, written into out[0..n).
void direction_forms(std::span<const double> y, const std::vector<double>& ysq, std::size_t n,
                     std::size_t d, MatrixPart part, std::span<const double> v,
                     std::span<double> out);

}  // namespace detail

}  // namespace misscov
