#include <doctest.h>

#include <cmath>
#include <sstream>

#include "misscov/covariance_model.hpp"
#include "misscov/eigen_jacobi.hpp"
#include "misscov/matrix_io.hpp"
#include "misscov/pipeline.hpp"
#include "misscov/rng.hpp"
#include "misscov/sampling.hpp"

using namespace misscov;

TEST_CASE("oracle mode equals the oracle machinery on the full sample") {
  const std::size_t d = 4, n = 400;
  const CovarianceSpec spec = build_covariance(d, SpectrumTag::geometric(0.7), 3);
  const MaskedSample s = generate_masked_sample(spec, DistTag::gaussian, 0.0, 0.8, n, 55);

  EstimatorConfig config;
  config.mode = EstimatorMode::oracle;
  config.oracle = {0.8, spec.summary.trace, spec.summary.operator_norm};
  const EstimatorReport rep = estimate_covariance(s, config);

  const DirectionNet net = build_net(d, default_extra_random(d), stream_key(s.seed, kStreamNet));
  const OracleEstimate direct =
      oracle_estimate(s.y, n, d, config.delta, 0.8, spec.summary.trace,
                      spec.summary.operator_norm, config.kappa, net);
  CHECK(rep.sigma_hat.packed() == direct.sigma_hat.packed());
  CHECK(rep.lambda1 == direct.lambda1);
  CHECK(rep.lambda2 == direct.lambda2);
  CHECK(rep.split_sizes == std::array<std::size_t, 4>{0, 0, 0, n});
}

TEST_CASE("quarter split layout") {
  const CovarianceSpec spec = build_covariance(3, SpectrumTag::identity(), std::nullopt);
  const MaskedSample s = generate_masked_sample(spec, DistTag::gaussian, 0.0, 1.0, 210, 4);
  EstimatorConfig config;
  config.delta = 0.2;
  const EstimatorReport rep = estimate_covariance(s, config);
  CHECK(rep.split_sizes[0] + rep.split_sizes[1] + rep.split_sizes[2] + rep.split_sizes[3] == 210);
  for (std::size_t q = 0; q < 4; ++q) CHECK(rep.split_sizes[q] >= 210 / 4);
  CHECK(rep.p_hat == 1.0);  // dense data
}

TEST_CASE("stage labels on failure") {
  // all-zero data fails at the p stage
  MaskedSample zeros;
  zeros.n = 100;
  zeros.d = 3;
  zeros.y.assign(300, 0.0);
  zeros.mask.assign(300, 0);
  EstimatorConfig config;
  CHECK_THROWS_WITH_AS(estimate_covariance(zeros, config), doctest::Contains("estimate_p:"),
                       std::runtime_error);
  CHECK_THROWS(estimate_covariance(MaskedSample{}, config));
}

TEST_CASE("baselines") {
  MaskedSample one;
  one.n = 1;
  one.d = 2;
  one.y = {3.0, -1.0};
  one.mask = {1, 1};
  const SymmetricMatrix m = baseline_sample_second_moment(one);
  CHECK(m(0, 0) == 9.0);
  CHECK(m(0, 1) == -3.0);
  CHECK(m(1, 1) == 1.0);

  MaskedSample basis;
  basis.n = 2;
  basis.d = 2;
  basis.y = {1.0, 0.0, 0.0, 1.0};
  basis.mask = {1, 0, 0, 1};
  const SymmetricMatrix half = baseline_sample_second_moment(basis);
  CHECK(half(0, 0) == 0.5);
  CHECK(half(1, 1) == 0.5);
  CHECK(half(0, 1) == 0.0);

  MaskedSample scalar;
  scalar.n = 3;
  scalar.d = 1;
  scalar.y = {1.0, 0.0, 2.0};
  scalar.mask = {1, 0, 1};
  CHECK(baseline_inverse_weighted(scalar, 1.0)(0, 0) == doctest::Approx(5.0 / 3.0).epsilon(1e-15));

  // p_hat = 1 reduces to the plain second moment
  const SymmetricMatrix s = baseline_sample_second_moment(basis);
  CHECK(baseline_inverse_weighted(basis, 1.0).packed() == s.packed());

  // inverse weighting rescales parts by 1/p and 1/p^2
  const SymmetricMatrix w = baseline_inverse_weighted(one, 0.5);
  CHECK(w(0, 0) == doctest::Approx(9.0 / 0.5));
  CHECK(w(0, 1) == doctest::Approx(-3.0 / 0.25));
}

TEST_CASE("report determinism and serialization") {
  const std::size_t d = 3, n = 160;
  const CovarianceSpec spec = build_covariance(d, SpectrumTag::geometric(0.6), 9);
  const MaskedSample s = generate_masked_sample(spec, DistTag::gaussian, 0.0, 0.7, n, 77);
  EstimatorConfig config;
  config.delta = 0.15;

  const EstimatorReport a = estimate_covariance(s, config);
  const EstimatorReport b = estimate_covariance(s, config);
  CHECK(a.sigma_hat.packed() == b.sigma_hat.packed());
  CHECK(a.p_hat == b.p_hat);
  CHECK(a.trace_hat == b.trace_hat);
  CHECK(a.opnorm_hat == b.opnorm_hat);
  CHECK(a.lambda1 == b.lambda1);
  CHECK(a.lambda2 == b.lambda2);
  CHECK(a.gate_satisfied == b.gate_satisfied);

  std::stringstream out;
  EstimatorReport with_err = a;
  with_err.error_opnorm = operator_norm(a.sigma_hat - spec.sigma);
  write_report(out, with_err, "full");
  const std::string text = out.str();
  CHECK(text.find("estimator=full\n") != std::string::npos);
  CHECK(text.find("p_hat=") != std::string::npos);
  CHECK(text.find("error_opnorm=") != std::string::npos);
  // the matrix block round-trips through the fixture reader
  std::stringstream in(text.substr(text.find("wall_time=")));
  std::string wall_line;
  std::getline(in, wall_line);
  const SymmetricMatrix back = read_matrix(in);
  CHECK(back.packed() == a.sigma_hat.packed());
}

TEST_CASE("row order is part of the input contract") {
  // same multiset of rows, different order: the median-of-means block
  // partition shifts, so results may differ but stay deterministic per order
  const CovarianceSpec spec = build_covariance(3, SpectrumTag::identity(), std::nullopt);
  const MaskedSample s = generate_masked_sample(spec, DistTag::gaussian, 0.0, 0.6, 200, 12);
  MaskedSample reversed = s;
  for (std::size_t i = 0; i < s.n; ++i)
    for (std::size_t j = 0; j < s.d; ++j) {
      reversed.y[i * s.d + j] = s.y[(s.n - 1 - i) * s.d + j];
      reversed.mask[i * s.d + j] = s.mask[(s.n - 1 - i) * s.d + j];
    }
  EstimatorConfig config;
  config.delta = 0.2;
  const EstimatorReport a1 = estimate_covariance(s, config);
  const EstimatorReport a2 = estimate_covariance(s, config);
  const EstimatorReport b = estimate_covariance(reversed, config);
  CHECK(a1.sigma_hat.packed() == a2.sigma_hat.packed());
  CHECK(std::isfinite(b.p_hat));  // reordering is valid input, just a different one
}

TEST_CASE("oracle machinery Monte Carlo accuracy on the identity") {
  // known parameters, identity covariance: most trials recover the matrix
  // well within operator-norm distance 0.5
  const std::size_t d = 5, n = 5000, trials = 50;
  const CovarianceSpec spec = build_covariance(d, SpectrumTag::identity(), std::nullopt);
  std::size_t hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const MaskedSample s =
        generate_masked_sample(spec, DistTag::gaussian, 0.0, 1.0, n, 9000 + t);
    const DirectionNet net = build_net(d, default_extra_random(d), stream_key(s.seed, kStreamNet));
    const OracleEstimate e = oracle_estimate(s.y, n, d, 0.1, 1.0, 5.0, 1.0,
                                             analytic_kappa(DistTag::gaussian, 0.0), net);
    if (operator_norm(e.sigma_hat - spec.sigma) < 0.5) ++hits;
  }
  CHECK(hits >= 45);  // >= 90%
}

TEST_CASE("full pipeline Monte Carlo accuracy on the identity") {
  const std::size_t d = 5, n = 8000, trials = 50;
  const CovarianceSpec spec = build_covariance(d, SpectrumTag::identity(), std::nullopt);
  EstimatorConfig config;  // delta = 0.1, gaussian kappa
  std::vector<double> errors;
  for (std::size_t t = 0; t < trials; ++t) {
    const MaskedSample s =
        generate_masked_sample(spec, DistTag::gaussian, 0.0, 1.0, n, 777000 + t);
    const EstimatorReport rep = estimate_covariance(s, config);
    errors.push_back(operator_norm(rep.sigma_hat - spec.sigma));
  }
  std::sort(errors.begin(), errors.end());
  CHECK(errors[trials / 2] <= 0.6);  // median
}

TEST_CASE("psd projection") {
  const std::size_t d = 4, n = 320;
  const CovarianceSpec spec = build_covariance(d, SpectrumTag::geometric(0.5), 2);
  const MaskedSample s = generate_masked_sample(spec, DistTag::student_t, 6.0, 0.6, n, 31);

  EstimatorConfig raw;
  raw.kappa = analytic_kappa(DistTag::student_t, 6.0);
  EstimatorConfig projected = raw;
  projected.psd_project = true;

  const EstimatorReport a = estimate_covariance(s, raw);
  const EstimatorReport b = estimate_covariance(s, projected);
  const EighResult eig = eigh(b.sigma_hat);
  CHECK(eig.eigenvalues.back() >= -1e-9);
  const double err_a = operator_norm(a.sigma_hat - spec.sigma);
  const double err_b = operator_norm(b.sigma_hat - spec.sigma);
  CHECK(err_b <= 2.0 * err_a + 1e-9);
}
