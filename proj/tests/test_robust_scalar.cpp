#include <doctest.h>

#include <cmath>

#include "misscov/invariants.hpp"
#include "misscov/robust_mean.hpp"
#include "misscov/rng.hpp"
#include "misscov/truncation.hpp"

using namespace misscov;

TEST_CASE("truncation function") {
  CHECK(psi(0.5) == 0.5);
  CHECK(psi(2.0) == 1.0);
  CHECK(psi(-3.0) == -1.0);
  CHECK(psi(1.0) == 1.0);
  CHECK(psi(-1.0) == -1.0);
  CHECK(psi(0.0) == 0.0);
}

TEST_CASE("finite rv validation") {
  CHECK_THROWS(make_finite_rv({}));
  CHECK_THROWS(make_finite_rv({{1.0, 0.7}, {2.0, 0.2}}));        // sums to 0.9
  CHECK_THROWS(make_finite_rv({{1.0, -0.1}, {2.0, 1.1}}));       // negative prob
  CHECK_NOTHROW(make_finite_rv({{1.0, 0.25}, {2.0, 0.75}}));
}

TEST_CASE("psi-mean bound point examples") {
  const PsiMeanBound zero = check_psi_mean_bound(make_finite_rv({{0.0, 1.0}}));
  CHECK(zero.lhs == 0.0);
  CHECK(zero.rhs_capped == 0.0);
  CHECK(zero.holds);

  const PsiMeanBound ten = check_psi_mean_bound(make_finite_rv({{10.0, 1.0}}));
  CHECK(ten.lhs == 1.0);
  CHECK(ten.rhs_stated == doctest::Approx(std::log(111.0) + 1.0).epsilon(1e-12));
  CHECK(ten.holds);
  CHECK(ten.holds_stated);
}

// The min-around-the-quadratic-term reading of the bound fails on heavy
// two-atom mixtures; the convexity argument supports the capped form, which is
// what the batteries assert.
TEST_CASE("psi-mean bound: stated form has a two-atom counterexample") {
  const FiniteSupportRV z = make_finite_rv({{-0.5, 0.985}, {100.0, 0.015}});
  const PsiMeanBound r = check_psi_mean_bound(z);
  CHECK(r.lhs == 1.0);  // EZ = 1.0075, truncated to 1
  CHECK(r.rhs_stated == doctest::Approx(0.85494).epsilon(1e-4));
  CHECK_FALSE(r.holds_stated);
  CHECK(r.rhs_capped == 1.0);
  CHECK(r.holds);
}

TEST_CASE("log-quadratic tilt bound") {
  const LogQuadTiltBound z0 = check_log_quad_tilt_bound(make_finite_rv({{0.0, 1.0}}), 2.0);
  CHECK(z0.lhs == 0.0);
  CHECK(z0.rhs == 0.0);
  CHECK(z0.holds);

  const LogQuadTiltBound unit = check_log_quad_tilt_bound(make_finite_rv({{1.0, 1.0}}), 1.0);
  const double lhs = std::log(3.0) + 1.0 / 6.0;
  const double boost = 1.0 + (7.0 + std::sqrt(6.0)) * (std::exp(1.0) - 1.0) / 6.0;
  CHECK(unit.lhs == doctest::Approx(lhs).epsilon(1e-12));
  CHECK(unit.rhs == doctest::Approx(std::log(2.0 + boost)).epsilon(1e-12));
  CHECK(unit.holds);

  Rng rng(5);
  for (int rep = 0; rep < 1000; ++rep) {
    const double v1 = 3.0 * rng.normal(), v2 = 3.0 * rng.normal();
    const double p = std::min(std::max(rng.uniform01(), 1e-6), 1.0 - 1e-6);
    const double a = 5.0 * rng.uniform_open01();
    CHECK(check_log_quad_tilt_bound(make_finite_rv({{v1, p}, {v2, 1.0 - p}}), a).holds);
  }
}

TEST_CASE("median of means") {
  const std::vector<double> xs = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  CHECK(median_of_means(xs, 3) == 5.0);  // block means 2, 5, 8

  const std::vector<double> even = {1, 2, 3, 4};
  CHECK(median_of_means(even, 2) == 2.5);  // mid-pair average

  const std::vector<double> constant(60, -1.25);
  CHECK(robust_mean(constant, 0.3) == -1.25);

  std::vector<double> outlier(101, 0.0);
  outlier[13] = 1e12;
  CHECK(median_of_means(outlier, 5) == 0.0);

  CHECK_THROWS_WITH_AS(robust_mean(std::vector<double>{1.0, 2.0, 3.0}, 0.01),
                       doctest::Contains("insufficient sample"), std::invalid_argument);
  CHECK_THROWS(robust_mean(constant, 0.0));
  CHECK_THROWS(robust_mean(constant, 1.0));
}

TEST_CASE("block count rule") {
  // ceil(8 ln(1/0.687)) = 3 forces three blocks on nine samples
  CHECK(mom_block_count(9, std::exp(-3.0 / 8.0)) == 3);
  CHECK(mom_block_count(1000, 0.05) == 24);  // ceil(8 ln 20)
  CHECK(mom_block_count(20, 1e-9) == 10);    // capped at n/2
}

TEST_CASE("mutated truncation breaks the inequality battery") {
  const auto clip_at_two = [](double x) { return x > 2.0 ? 2.0 : (x < -2.0 ? -2.0 : x); };
  const BatteryResult broken = battery_truncation_inequalities(123, clip_at_two, 2000);
  CHECK(broken.failures > 0);
  const BatteryResult good = battery_truncation_inequalities(123, psi, 2000);
  CHECK(good.failures == 0);
}
