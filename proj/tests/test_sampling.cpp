#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "misscov/covariance_model.hpp"
#include "misscov/direction_net.hpp"
#include "misscov/eigen_jacobi.hpp"
#include "misscov/rng.hpp"
#include "misscov/sampling.hpp"

using namespace misscov;

TEST_CASE("covariance construction") {
  const CovarianceSpec id3 = build_covariance(3, SpectrumTag::identity(), std::nullopt);
  CHECK(id3.sigma.packed() == SymmetricMatrix::identity(3).packed());
  CHECK(id3.summary.effective_rank == doctest::Approx(3.0));

  const CovarianceSpec geo = build_covariance(10, SpectrumTag::geometric(0.5), std::nullopt);
  CHECK(geo.summary.trace == doctest::Approx(2.0 * (1.0 - std::pow(0.5, 10))).epsilon(1e-14));
  CHECK(geo.summary.operator_norm == 1.0);

  const CovarianceSpec spiked = build_covariance(5, SpectrumTag::spiked(4.0, 1.0), 7);
  CHECK(spiked.summary.effective_rank == doctest::Approx(2.0).epsilon(1e-14));
  // rotation preserves the spectrum
  const SpectralSummary numeric = spectral_summary(spiked.sigma);
  CHECK(numeric.operator_norm == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(numeric.trace == doctest::Approx(8.0).epsilon(1e-9));
  CHECK(numeric.eigenvalues.back() >= -1e-9 * numeric.operator_norm);  // PSD

  // the stored square root actually squares back
  SymmetricMatrix square(5);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 5; ++k) s += spiked.sqrt_sigma(i, k) * spiked.sqrt_sigma(k, j);
      square.ref(i, j) = s;
    }
  double worst = 0.0;
  for (std::size_t k = 0; k < square.packed().size(); ++k)
    worst = std::max(worst, std::abs(square.packed()[k] - spiked.sigma.packed()[k]));
  CHECK(worst <= 1e-8 * (1.0 + spiked.sigma.frobenius_norm()));

  CHECK_THROWS(build_covariance(3, SpectrumTag::geometric(1.0), std::nullopt));
  CHECK_THROWS(build_covariance(3, SpectrumTag::spiked(0.5, 1.0), std::nullopt));
  CHECK_THROWS(build_covariance(0, SpectrumTag::identity(), std::nullopt));
}

TEST_CASE("gaussian sampling") {
  const CovarianceSpec spec = build_covariance(2, SpectrumTag::identity(), std::nullopt);
  const std::size_t n = 100000;
  const std::vector<double> x = sample_gaussian(spec, n, 42);
  const std::vector<double> again = sample_gaussian(spec, n, 42);
  CHECK(x == again);

  double s00 = 0.0, s01 = 0.0, s11 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s00 += x[i * 2] * x[i * 2];
    s01 += x[i * 2] * x[i * 2 + 1];
    s11 += x[i * 2 + 1] * x[i * 2 + 1];
  }
  const double band = 5.0 * std::sqrt(3.0 / n);
  CHECK(std::abs(s00 / n - 1.0) <= band);
  CHECK(std::abs(s11 / n - 1.0) <= band);
  CHECK(std::abs(s01 / n) <= band);
}

TEST_CASE("student t sampling") {
  const CovarianceSpec spec = build_covariance(2, SpectrumTag::geometric(0.5), 3);
  CHECK_THROWS_WITH_AS(sample_student_t(spec, 4.0, 10, 1), doctest::Contains("fourth moment"),
                       std::invalid_argument);

  const std::size_t n = 100000;
  const std::vector<double> x = sample_student_t(spec, 8.0, n, 5);
  double s00 = 0.0, s01 = 0.0, s11 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s00 += x[i * 2] * x[i * 2];
    s01 += x[i * 2] * x[i * 2 + 1];
    s11 += x[i * 2 + 1] * x[i * 2 + 1];
  }
  // scaling (dof-2)/W makes the covariance exactly sigma; heavy tails widen
  // the Monte Carlo band relative to the gaussian case
  CHECK(std::abs(s00 / n - spec.sigma(0, 0)) <= 0.05);
  CHECK(std::abs(s01 / n - spec.sigma(0, 1)) <= 0.05);
  CHECK(std::abs(s11 / n - spec.sigma(1, 1)) <= 0.05);
}

TEST_CASE("sparsify basics") {
  const CovarianceSpec spec = build_covariance(4, SpectrumTag::identity(), std::nullopt);
  const std::vector<double> x = sample_gaussian(spec, 50, 9);
  const MaskedSample dense = sparsify(x, 50, 4, 1.0, 77);
  CHECK(dense.y == x);
  for (auto m : dense.mask) CHECK(m == 1);
  CHECK_THROWS(sparsify(x, 50, 4, 0.0, 1));
  CHECK_THROWS(sparsify(x, 50, 4, 1.5, 1));

  const MaskedSample s = sparsify(x, 50, 4, 0.5, 77);
  for (std::size_t k = 0; k < s.y.size(); ++k) {
    if (s.mask[k])
      CHECK(s.y[k] == x[k]);
    else
      CHECK(s.y[k] == 0.0);
  }
}

TEST_CASE("empirical moment-ratio audit") {
  // constant-magnitude scalar data: ratio is exactly 1
  std::vector<double> pm(200);
  for (std::size_t i = 0; i < 200; ++i) pm[i] = i % 2 ? -1.0 : 1.0;
  CHECK(audit_kappa(pm, 200, 1, build_net(1, 0, 1)) == 1.0);

  const CovarianceSpec spec = build_covariance(2, SpectrumTag::identity(), std::nullopt);
  const std::size_t n = 100000;
  const DirectionNet net = build_net(2, 10, 3);

  const std::vector<double> g = sample_gaussian(spec, n, 11);
  const double kg = audit_kappa(g, n, 2, net);
  CHECK(kg >= 1.25);
  CHECK(kg <= 1.40);

  // dof = 10 keeps the eighth moment finite, so the audit concentrates
  const std::vector<double> t10 = sample_student_t(spec, 10.0, n, 13);
  const double k10 = audit_kappa(t10, n, 2, net);
  CHECK(k10 >= 1.33);
  CHECK(k10 <= 1.52);

  // dof = 8 target is (4.5)^{1/4} ~ 1.456 with a heavy-tailed audit
  const std::vector<double> t8 = sample_student_t(spec, 8.0, n, 17);
  const double k8 = audit_kappa(t8, n, 2, net);
  CHECK(k8 >= 1.30);
  CHECK(k8 <= 1.90);

  CHECK_THROWS(audit_kappa(pm, 50, 1, build_net(1, 0, 1)));  // below sample floor
  std::vector<double> zeros(200, 0.0);
  CHECK_THROWS_WITH_AS(audit_kappa(zeros, 200, 1, build_net(1, 0, 1)),
                       doctest::Contains("degenerate marginal"), std::runtime_error);
}

TEST_CASE("dataset dump round trip") {
  const CovarianceSpec spec = build_covariance(3, SpectrumTag::geometric(0.6), 1);
  const MaskedSample s = generate_masked_sample(spec, DistTag::student_t, 8.0, 0.7, 25, 99);
  const std::string path = "/tmp/misscov_test_dataset.txt";
  save_dataset(path, s);
  const MaskedSample back = load_dataset(path);
  CHECK(back.n == s.n);
  CHECK(back.d == s.d);
  CHECK(back.y == s.y);
  CHECK(back.true_p == s.true_p);
  CHECK(back.seed == s.seed);
  CHECK(back.dist == DistTag::student_t);
  CHECK(back.dof == 8.0);
  CHECK(back.mask == s.mask);  // reconstructed from the zero pattern
  std::remove(path.c_str());
}
