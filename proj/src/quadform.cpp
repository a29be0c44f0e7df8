#include "misscov/quadform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "misscov/truncation.hpp"

namespace misscov {

namespace detail {

std::vector<double> squared_rows(std::span<const double> y) {
  std::vector<double> sq(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) sq[k] = y[k] * y[k];
  return sq;
}

void direction_forms(std::span<const double> y, const std::vector<double>& ysq, std::size_t n,
                     std::size_t d, MatrixPart part, std::span<const double> v,
                     std::span<double> out) {
  std::vector<double> vsq(d);
  for (std::size_t j = 0; j < d; ++j) vsq[j] = v[j] * v[j];
  if (part == MatrixPart::diagonal) {
    for (std::size_t i = 0; i < n; ++i) {
      double diag = 0.0;
      const double* row_sq = ysq.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) diag += row_sq[j] * vsq[j];
      out[i] = diag;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      double diag = 0.0, dot = 0.0;
      const double* row = y.data() + i * d;
      const double* row_sq = ysq.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) {
        diag += row_sq[j] * vsq[j];
        dot += row[j] * v[j];
      }
      out[i] = dot * dot - diag;
    }
  }
}

double truncated_direction_value(std::span<const double> y, const std::vector<double>& ysq,
                                 std::size_t n, std::size_t d, MatrixPart part, double lambda,
                                 std::span<const double> v) {
  std::vector<double> vsq(d);
  for (std::size_t j = 0; j < d; ++j) vsq[j] = v[j] * v[j];
  // clamp keeps lambda*q out of the infinity range; psi saturates long before
  constexpr double kClamp = 1e15;
  double acc = 0.0;
  if (part == MatrixPart::diagonal) {
    for (std::size_t i = 0; i < n; ++i) {
      double diag = 0.0;
      const double* row_sq = ysq.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) diag += row_sq[j] * vsq[j];
      acc += psi(std::clamp(lambda * diag, -kClamp, kClamp));
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      double diag = 0.0, dot = 0.0;
      const double* row = y.data() + i * d;
      const double* row_sq = ysq.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) {
        diag += row_sq[j] * vsq[j];
        dot += row[j] * v[j];
      }
      acc += psi(std::clamp(lambda * (dot * dot - diag), -kClamp, kClamp));
    }
  }
  return acc / (static_cast<double>(n) * lambda);
}

}  // namespace detail

namespace {

TruncatedFormTable truncated_form_impl(std::span<const double> y, std::size_t n, std::size_t d,
                                       MatrixPart part, double lambda, const DirectionNet& net,
                                       bool parallel) {
  if (!(lambda > 0.0)) throw std::invalid_argument("truncated_form: lambda must be > 0");
  if (n == 0 || y.size() != n * d || net.dim != d)
    throw std::invalid_argument("truncated_form: shape mismatch");

  const std::vector<double> ysq = detail::squared_rows(y);
  TruncatedFormTable table;
  table.net = &net;
  table.part = part;
  table.lambda = lambda;
  table.values.resize(net.count);

  const auto count = static_cast<std::ptrdiff_t>(net.count);
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < count; ++k)
      table.values[k] =
          detail::truncated_direction_value(y, ysq, n, d, part, lambda, net.vec(k));
  } else {
    for (std::ptrdiff_t k = 0; k < count; ++k)
      table.values[k] =
          detail::truncated_direction_value(y, ysq, n, d, part, lambda, net.vec(k));
  }
  return table;
}

SortedFormTable build_sorted_forms_impl(std::span<const double> y, std::size_t n, std::size_t d,
                                        MatrixPart part, const DirectionNet& net,
                                        std::span<const double> extra_direction, bool parallel) {
  if (n == 0 || y.size() != n * d || net.dim != d)
    throw std::invalid_argument("build_sorted_forms: shape mismatch");
  if (!extra_direction.empty() && extra_direction.size() != d)
    throw std::invalid_argument("build_sorted_forms: extra direction has wrong dimension");

  const std::vector<double> ysq = detail::squared_rows(y);
  SortedFormTable t;
  t.directions = net.count + (extra_direction.empty() ? 0 : 1);
  t.n = n;
  t.sorted.resize(t.directions * n);
  t.prefix.resize(t.directions * (n + 1));

  const auto dirs = static_cast<std::ptrdiff_t>(t.directions);
  auto fill_one = [&](std::ptrdiff_t k) {
    const std::span<const double> v =
        static_cast<std::size_t>(k) < net.count ? net.vec(k) : extra_direction;
    std::span<double> slot{t.sorted.data() + k * static_cast<std::ptrdiff_t>(n), n};
    detail::direction_forms(y, ysq, n, d, part, v, slot);
    std::sort(slot.begin(), slot.end());
    double* pre = t.prefix.data() + k * static_cast<std::ptrdiff_t>(n + 1);
    pre[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) pre[i + 1] = pre[i] + slot[i];
  };

  if (parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < dirs; ++k) fill_one(k);
  } else {
    for (std::ptrdiff_t k = 0; k < dirs; ++k) fill_one(k);
  }
  return t;
}

}  // namespace

TruncatedFormTable truncated_form(std::span<const double> y, std::size_t n, std::size_t d,
                                  MatrixPart part, double lambda, const DirectionNet& net) {
  return truncated_form_impl(y, n, d, part, lambda, net, true);
}

TruncatedFormTable truncated_form_serial(std::span<const double> y, std::size_t n, std::size_t d,
                                         MatrixPart part, double lambda, const DirectionNet& net) {
  return truncated_form_impl(y, n, d, part, lambda, net, false);
}

double SortedFormTable::sum_psi(std::size_t dir, double s) const {
  if (!(s >= 0.0)) throw std::invalid_argument("sum_psi: scale must be >= 0");
  const double* q = sorted.data() + dir * n;
  const double* pre = prefix.data() + dir * (n + 1);
  if (s == 0.0) return 0.0;
  if (!std::isfinite(s)) {
    // limit case: psi(s*q) -> sign(q)
    const auto pos = static_cast<std::size_t>(std::upper_bound(q, q + n, 0.0) - q);
    const auto neg = static_cast<std::size_t>(std::lower_bound(q, q + n, 0.0) - q);
    return static_cast<double>(n - pos) - static_cast<double>(neg);
  }
  const double threshold = 1.0 / s;
  const auto hi = static_cast<std::size_t>(std::lower_bound(q, q + n, threshold) - q);
  const auto lo = static_cast<std::size_t>(std::lower_bound(q, q + n, -threshold) - q);
  const double linear = pre[hi] - pre[lo];
  return s * linear + static_cast<double>(n - hi) - static_cast<double>(lo);
}

SortedFormTable build_sorted_forms(std::span<const double> y, std::size_t n, std::size_t d,
                                   MatrixPart part, const DirectionNet& net,
                                   std::span<const double> extra_direction) {
  return build_sorted_forms_impl(y, n, d, part, net, extra_direction, true);
}

SortedFormTable build_sorted_forms_serial(std::span<const double> y, std::size_t n, std::size_t d,
                                          MatrixPart part, const DirectionNet& net,
                                          std::span<const double> extra_direction) {
  return build_sorted_forms_impl(y, n, d, part, net, extra_direction, false);
}

}  // namespace misscov
