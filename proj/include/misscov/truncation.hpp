#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace misscov {

// Clip to [-1, 1]; identity inside.
inline double psi(double x) { return x > 1.0 ? 1.0 : (x < -1.0 ? -1.0 : x); }

// Finitely supported scalar random variable for exact expectation checks.
struct FiniteSupportRV {
  std::vector<std::pair<double, double>> atoms;  // (value, probability)
};

// Validates probabilities (nonnegative, sum to 1 within 1e-12).
FiniteSupportRV make_finite_rv(std::vector<std::pair<double, double>> atoms);

// psi(EZ) against the log-quadratic moment expression. Two right-hand sides
// are computed: `rhs_stated` places min{1, .} around EZ^2/6 alone;
// `rhs_capped` is min{1, E log(1+Z+Z^2) + EZ^2/6}, the form the convexity
// argument actually yields. `holds` refers to the capped form; the stated
// form has concrete two-atom counterexamples (see tests).
struct PsiMeanBound {
  double lhs = 0.0;
  double rhs_stated = 0.0;
  double rhs_capped = 0.0;
  bool holds_stated = false;
  bool holds = false;
};
PsiMeanBound check_psi_mean_bound(const FiniteSupportRV& z,
                                  const std::function<double(double)>& trunc = psi);

// E log(1+Z+Z^2) + a * E[min{1, Z^2/6}] against
// E log(1 + Z + (1 + (7+sqrt(6))(e^a - 1)/6) Z^2). `lhs_stated` swaps the
// expectation and the min (a * min{1, EZ^2/6}); `holds` refers to the
// expectation-inside form.
struct LogQuadTiltBound {
  double lhs = 0.0;
  double lhs_stated = 0.0;
  double rhs = 0.0;
  bool holds = false;
  bool holds_stated = false;
};
LogQuadTiltBound check_log_quad_tilt_bound(const FiniteSupportRV& z, double a);

}  // namespace misscov
