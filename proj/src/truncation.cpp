#include "misscov/truncation.hpp"

#include <cmath>
#include <stdexcept>

namespace misscov {

namespace {
constexpr double kSlack = 1e-12;

double expect(const FiniteSupportRV& z, const std::function<double(double)>& f) {
  double s = 0.0;
  for (const auto& [value, prob] : z.atoms) s += prob * f(value);
  return s;
}
}  // namespace

FiniteSupportRV make_finite_rv(std::vector<std::pair<double, double>> atoms) {
  if (atoms.empty()) throw std::invalid_argument("finite rv needs at least one atom");
  double total = 0.0;
  for (const auto& [value, prob] : atoms) {
    if (!std::isfinite(value)) throw std::invalid_argument("finite rv: non-finite atom value");
    if (prob < 0.0) throw std::invalid_argument("finite rv: negative probability");
    total += prob;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("finite rv: probabilities must sum to 1 within 1e-12");
  return FiniteSupportRV{std::move(atoms)};
}

PsiMeanBound check_psi_mean_bound(const FiniteSupportRV& z,
                                  const std::function<double(double)>& trunc) {
  const double mean = expect(z, [](double v) { return v; });
  const double mean_sq = expect(z, [](double v) { return v * v; });
  // 1 + v + v^2 >= 3/4 > 0 for every real v, so the log is always defined.
  const double mean_log = expect(z, [](double v) { return std::log1p(v + v * v); });

  PsiMeanBound r;
  r.lhs = trunc(mean);
  r.rhs_stated = mean_log + std::min(1.0, mean_sq / 6.0);
  r.rhs_capped = std::min(1.0, mean_log + mean_sq / 6.0);
  r.holds_stated = r.lhs <= r.rhs_stated + kSlack;
  r.holds = r.lhs <= r.rhs_capped + kSlack;
  return r;
}

LogQuadTiltBound check_log_quad_tilt_bound(const FiniteSupportRV& z, double a) {
  if (!(a > 0.0)) throw std::invalid_argument("check_log_quad_tilt_bound: a must be > 0");
  const double mean_sq = expect(z, [](double v) { return v * v; });
  const double mean_log = expect(z, [](double v) { return std::log1p(v + v * v); });
  const double mean_min = expect(z, [](double v) { return std::min(1.0, v * v / 6.0); });
  const double boost = 1.0 + (7.0 + std::sqrt(6.0)) * std::expm1(a) / 6.0;
  const double rhs = expect(z, [boost](double v) { return std::log1p(v + boost * v * v); });

  LogQuadTiltBound r;
  r.lhs = mean_log + a * mean_min;
  r.lhs_stated = mean_log + a * std::min(1.0, mean_sq / 6.0);
  r.rhs = rhs;
  r.holds = r.lhs <= r.rhs + kSlack;
  r.holds_stated = r.lhs_stated <= r.rhs + kSlack;
  return r;
}

}  // namespace misscov
