#include "misscov/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "misscov/covariance_model.hpp"
#include "misscov/direction_net.hpp"
#include "misscov/eigen_jacobi.hpp"
#include "misscov/minimax_fit.hpp"
#include "misscov/oracle_estimator.hpp"
#include "misscov/param_estimators.hpp"
#include "misscov/pipeline.hpp"
#include "misscov/quadform.hpp"
#include "misscov/robust_mean.hpp"
#include "misscov/rng.hpp"
#include "misscov/sampling.hpp"
#include "misscov/text_format.hpp"

namespace misscov {

namespace {

class Battery {
 public:
  explicit Battery(std::string name) { result_.name = std::move(name); }

  void check(bool ok, const std::string& what) {
    ++result_.checks;
    if (ok) return;
    ++result_.failures;
    if (result_.notes.size() < 8) result_.notes.push_back(what);
  }

  BatteryResult take() { return std::move(result_); }

 private:
  BatteryResult result_;
};

SymmetricMatrix random_symmetric(Rng& rng, std::size_t d, double scale = 1.0) {
  SymmetricMatrix m(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j <= i; ++j) m.ref(i, j) = scale * rng.normal();
  return m;
}

std::vector<double> random_unit(Rng& rng, std::size_t d) {
  std::vector<double> v(d);
  double norm_sq = 0.0;
  do {
    norm_sq = 0.0;
    for (double& x : v) {
      x = rng.normal();
      norm_sq += x * x;
    }
  } while (norm_sq < 1e-12);
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (double& x : v) x *= inv;
  return v;
}

// Two-stage exhaustive grid for nvar <= 3 minimax problems. The objective is
// convex, so a coarse pass over a bounding box plus a fine pass around the
// two best candidates pins the global optimum to fine-step resolution.
double brute_force_minimax(const MinimaxProblem& p, double fine_step = 1e-3) {
  double scale = 0.0;
  for (double b : p.targets) scale = std::max(scale, std::abs(b));
  const double bound = 2.0 * scale + 0.1;

  std::vector<double> theta(p.nvar, 0.0);
  double best = minimax_objective(p, theta);
  std::vector<double> best_theta = theta;

  auto scan = [&](const std::vector<double>& center, double radius, double step) {
    std::vector<double> lo(p.nvar), hi(p.nvar);
    std::vector<std::size_t> counts(p.nvar);
    for (std::size_t j = 0; j < p.nvar; ++j) {
      lo[j] = center[j] - radius;
      if (p.nonneg) lo[j] = std::max(lo[j], 0.0);
      hi[j] = center[j] + radius;
      counts[j] = static_cast<std::size_t>(std::floor((hi[j] - lo[j]) / step)) + 1;
    }
    std::vector<std::size_t> idx(p.nvar, 0);
    std::vector<double> point(p.nvar);
    for (;;) {
      for (std::size_t j = 0; j < p.nvar; ++j) point[j] = lo[j] + step * static_cast<double>(idx[j]);
      const double obj = minimax_objective(p, point);
      if (obj < best) {
        best = obj;
        best_theta = point;
      }
      std::size_t j = 0;
      while (j < p.nvar && ++idx[j] == counts[j]) idx[j++] = 0;
      if (j == p.nvar) break;
    }
  };

  std::vector<double> origin(p.nvar, 0.0);
  scan(origin, bound, 0.05);
  scan(best_theta, 0.06, fine_step);
  return best;
}

double empirical_second_moment_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double standard_error(const std::vector<double>& xs) {
  const double mean = empirical_second_moment_of(xs);
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size() - 1);
  return std::sqrt(var / static_cast<double>(xs.size()));
}

}  // namespace

BatteryResult battery_matrix_identities(std::uint64_t seed) {
  Battery b("matrix_identities");
  Rng rng(seed, 101);

  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t d = 2 + rng.next_u64() % 11;
    const SymmetricMatrix m = random_symmetric(rng, d);
    const SymmetricMatrix dg = m.diag_part();
    const SymmetricMatrix off = m.off_part();
    bool exact = true;
    for (std::size_t k = 0; k < m.packed().size(); ++k)
      exact &= dg.packed()[k] + off.packed()[k] == m.packed()[k];
    b.check(exact, "diag_part + off_part must reproduce the matrix exactly");
    b.check(operator_norm(off) <= 2.0 * operator_norm(m) + 1e-9,
            "operator norm of the off part exceeded twice the matrix norm");
  }

  for (std::size_t d : {2ul, 5ul, 13ul, 50ul}) {
    const SymmetricMatrix m = random_symmetric(rng, d);
    const EighResult eig = eigh(m);
    const double tol = 1e-9 * (1.0 + m.frobenius_norm());
    double resid = 0.0, orth = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t k = 0; k < d; ++k) {
        double mv = 0.0, vtv = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          mv += m(i, j) * eig.eigenvectors[j * d + k];
          vtv += eig.eigenvectors[j * d + i] * eig.eigenvectors[j * d + k];
        }
        const double r = mv - eig.eigenvectors[i * d + k] * eig.eigenvalues[k];
        resid += r * r;
        const double o = vtv - (i == k ? 1.0 : 0.0);
        orth += o * o;
      }
    b.check(std::sqrt(resid) <= tol, "eigh residual ||MV - V diag|| too large at d=" +
                                         std::to_string(d));
    b.check(std::sqrt(orth) <= 1e-9, "eigh eigenvectors lost orthonormality at d=" +
                                         std::to_string(d));
    b.check(std::is_sorted(eig.eigenvalues.rbegin(), eig.eigenvalues.rend()),
            "eigenvalues must be sorted descending");
    double trace_gap = m.trace();
    for (double lam : eig.eigenvalues) trace_gap -= lam;
    b.check(std::abs(trace_gap) <= 1e-9 * std::max(1.0, std::abs(m.trace())),
            "trace must match the eigenvalue sum");
  }

  // net sup is a lower bound of the operator norm; tight for diagonal matrices
  const DirectionNet net = build_net(5, 120, rng.next_u64());
  for (int rep = 0; rep < 10; ++rep) {
    const SymmetricMatrix m = random_symmetric(rng, 5);
    const auto sup = sup_abs_over_net(
        net, [&](std::span<const double> v) { return m.quadratic_form(v); });
    b.check(sup.value <= operator_norm(m) + 1e-9, "net sup exceeded the operator norm");
  }
  SymmetricMatrix diag(5);
  for (std::size_t i = 0; i < 5; ++i) diag.ref(i, i) = rng.normal();
  const auto sup = sup_abs_over_net(
      net, [&](std::span<const double> v) { return diag.quadratic_form(v); });
  b.check(std::abs(sup.value - operator_norm(diag)) <= 1e-9,
          "net sup must attain the norm of a diagonal matrix on basis directions");

  // spectral summaries
  b.check(std::abs(spectral_summary(SymmetricMatrix::identity(10)).effective_rank - 10.0) <= 1e-12,
          "identity must have effective rank d");
  SymmetricMatrix spiked(5);
  spiked.ref(0, 0) = 4.0;
  for (std::size_t i = 1; i < 5; ++i) spiked.ref(i, i) = 1.0;
  b.check(std::abs(spectral_summary(spiked).effective_rank - 2.0) <= 1e-12,
          "diag(4,1,1,1,1) must have effective rank 2");
  bool threw = false;
  try {
    spectral_summary(SymmetricMatrix(3));
  } catch (const std::exception&) {
    threw = true;
  }
  b.check(threw, "spectral_summary must reject the zero matrix");

  return b.take();
}

BatteryResult battery_generator_moments(std::uint64_t seed) {
  Battery b("generator_moments");
  Rng rng(seed, 102);

  {  // sparsify determinism and mask consistency
    const CovarianceSpec spec = build_covariance(7, SpectrumTag::identity(), std::nullopt);
    const std::vector<double> x = sample_gaussian(spec, 200, rng.next_u64());
    const std::uint64_t mask_seed = rng.next_u64();
    const MaskedSample a = sparsify(x, 200, 7, 0.6, mask_seed);
    const MaskedSample c = sparsify(x, 200, 7, 0.6, mask_seed);
    b.check(a.y == c.y && a.mask == c.mask, "sparsify must be deterministic given the seed");
    bool consistent = true;
    for (std::size_t k = 0; k < a.y.size(); ++k) {
      if (a.mask[k] == 0) consistent &= a.y[k] == 0.0;
      if (a.mask[k] == 1) consistent &= a.y[k] == x[k];
      if (x[k] != 0.0) consistent &= (a.mask[k] == 1) == (a.y[k] != 0.0);
    }
    b.check(consistent, "mask must mirror the zero pattern of kept entries");
    const MaskedSample dense = sparsify(x, 200, 7, 1.0, mask_seed);
    b.check(dense.y == std::vector<double>(x.begin(), x.end()), "p=1 must keep the data verbatim");
  }

  {  // kept fraction concentration, N*d = 1e6
    const CovarianceSpec spec = build_covariance(10, SpectrumTag::identity(), std::nullopt);
    const std::vector<double> x = sample_gaussian(spec, 100000, rng.next_u64());
    const MaskedSample s = sparsify(x, 100000, 10, 0.5, rng.next_u64());
    double kept = 0.0;
    for (auto m : s.mask) kept += m;
    kept /= static_cast<double>(s.mask.size());
    b.check(std::abs(kept - 0.5) <= 5.0 * std::sqrt(0.25 / 1e6),
            "kept fraction strayed outside the binomial band");
  }

  {  // second-moment identity and zero mean
    const CovarianceSpec spec =
        build_covariance(4, SpectrumTag::geometric(0.6), rng.next_u64());
    const std::size_t m = 100000;
    const double p = 0.7;
    const MaskedSample s = generate_masked_sample(spec, DistTag::gaussian, 0.0, p, m,
                                                  rng.next_u64());
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        std::vector<double> prods(m);
        for (std::size_t r = 0; r < m; ++r) prods[r] = s.y[r * 4 + i] * s.y[r * 4 + j];
        const double mean = empirical_second_moment_of(prods);
        const double se = standard_error(prods);
        const double target = (i == j ? p : p * p) * spec.sigma(i, j);
        b.check(std::abs(mean - target) <= 5.0 * se + 1e-12,
                "masked second moment missed p-scaled target at (" + std::to_string(i) + "," +
                    std::to_string(j) + ")");
      }
    const std::vector<double> x = sample_gaussian(spec, m, rng.next_u64());
    for (std::size_t j = 0; j < 4; ++j) {
      double mean = 0.0;
      for (std::size_t r = 0; r < m; ++r) mean += x[r * 4 + j];
      mean /= static_cast<double>(m);
      b.check(std::abs(mean) <= 5.0 * std::sqrt(spec.summary.operator_norm / m),
              "gaussian sample mean strayed from zero");
    }
  }

  {  // student-t: exact covariance scaling and kurtosis ratio
    const CovarianceSpec spec = build_covariance(3, SpectrumTag::identity(), std::nullopt);
    const std::size_t m = 200000;
    const std::vector<double> x = sample_student_t(spec, 12.0, m, rng.next_u64());
    std::vector<double> sq(m);
    for (std::size_t r = 0; r < m; ++r) sq[r] = x[r * 3] * x[r * 3];
    const double m2 = empirical_second_moment_of(sq);
    b.check(std::abs(m2 - 1.0) <= 0.05, "student_t marginal variance must stay near 1");
    std::vector<double> quads(m);
    for (std::size_t r = 0; r < m; ++r) quads[r] = sq[r] * sq[r];
    const double ratio = empirical_second_moment_of(quads) / (m2 * m2);
    b.check(std::abs(ratio - 3.75) <= 0.5, "dof=12 kurtosis ratio must be near 3(dof-2)/(dof-4)");

    // heavy dof=5: median over batches to tame the tail
    const std::vector<double> x5 = sample_student_t(spec, 5.0, m, rng.next_u64());
    std::vector<double> ratios;
    const std::size_t batch = 10000;
    for (std::size_t start = 0; start + batch <= m; start += batch) {
      double b2 = 0.0, b4 = 0.0;
      for (std::size_t r = start; r < start + batch; ++r) {
        const double q = x5[r * 3] * x5[r * 3];
        b2 += q;
        b4 += q * q;
      }
      b2 /= batch;
      b4 /= batch;
      ratios.push_back(b4 / (b2 * b2));
    }
    std::sort(ratios.begin(), ratios.end());
    const double med = ratios[ratios.size() / 2];
    b.check(med >= 5.0 && med <= 13.0,
            "dof=5 batch-median kurtosis ratio must sit near the analytic value 9, got " +
                format_double(med));

    bool threw = false;
    try {
      sample_student_t(spec, 4.0, 10, 1);
    } catch (const std::exception&) {
      threw = true;
    }
    b.check(threw, "dof <= 4 must be rejected");
  }

  {  // empirical L4-L2 constant for gaussian data
    const CovarianceSpec spec = build_covariance(5, SpectrumTag::geometric(0.8), rng.next_u64());
    const std::size_t m = 100000;
    const std::vector<double> x = sample_gaussian(spec, m, rng.next_u64());
    const DirectionNet net = build_net(5, 20, rng.next_u64());
    const double kappa = audit_kappa(x, m, 5, net);
    b.check(kappa >= 1.25 && kappa <= 1.40,
            "gaussian empirical kappa outside [1.25, 1.40]: " + format_double(kappa));
    // constant-magnitude scalar data has ratio exactly 1
    std::vector<double> pm(200);
    for (std::size_t i = 0; i < 200; ++i) pm[i] = i % 2 == 0 ? 1.0 : -1.0;
    const DirectionNet net1 = build_net(1, 0, 1);
    b.check(audit_kappa(pm, 200, 1, net1) == 1.0, "sign data must have kappa exactly 1");
  }

  return b.take();
}

BatteryResult battery_truncation_inequalities(std::uint64_t seed,
                                              const std::function<double(double)>& trunc,
                                              std::size_t draws) {
  Battery b("truncation_inequalities");
  Rng rng(seed, 103);

  // pointwise properties on a grid
  bool odd = true, lipschitz = true, bounded = true, identity = true;
  double prev_x = -5.0, prev_y = trunc(-5.0);
  for (double x = -5.0; x <= 5.0; x += 0.01) {
    const double y = trunc(x);
    odd &= std::abs(y + trunc(-x)) <= 1e-15;
    bounded &= std::abs(y) <= 1.0;
    if (std::abs(x) <= 1.0) identity &= y == x;
    lipschitz &= std::abs(y - prev_y) <= std::abs(x - prev_x) + 1e-15;
    prev_x = x;
    prev_y = y;
  }
  b.check(odd, "truncation must be odd");
  b.check(bounded, "truncation must be bounded by 1");
  b.check(identity, "truncation must be the identity on [-1,1]");
  b.check(lipschitz, "truncation must be 1-Lipschitz");

  auto random_two_atom = [&]() {
    // mixed scales: moderate atoms, occasional huge atoms, occasional tiny probs
    auto draw_value = [&]() {
      const double u = rng.uniform01();
      if (u < 0.6) return 2.0 * rng.normal();
      const double mag = std::exp(rng.uniform01() * std::log(1000.0));
      return rng.uniform01() < 0.5 ? mag : -mag;
    };
    double prob = rng.uniform01() < 0.3 ? std::pow(10.0, -4.0 * rng.uniform01())
                                        : rng.uniform01();
    prob = std::min(std::max(prob, 1e-9), 1.0 - 1e-9);
    return make_finite_rv({{draw_value(), prob}, {draw_value(), 1.0 - prob}});
  };

  for (std::size_t i = 0; i < draws; ++i) {
    const FiniteSupportRV z = random_two_atom();
    const PsiMeanBound part1 = check_psi_mean_bound(z, trunc);
    b.check(part1.holds, "psi-mean bound violated: lhs=" + format_double(part1.lhs) +
                             " rhs=" + format_double(part1.rhs_capped));
    const double a = 5.0 * rng.uniform_open01();
    const LogQuadTiltBound part2 = check_log_quad_tilt_bound(z, a);
    b.check(part2.holds, "log-quadratic tilt bound violated at a=" + format_double(a));
  }

  {  // point examples
    const PsiMeanBound zero = check_psi_mean_bound(make_finite_rv({{0.0, 1.0}}), trunc);
    b.check(zero.lhs == 0.0 && zero.holds, "point mass at 0 must give lhs = 0");
    const PsiMeanBound ten = check_psi_mean_bound(make_finite_rv({{10.0, 1.0}}), trunc);
    b.check(ten.holds && std::abs(ten.lhs - trunc(10.0)) <= 1e-15,
            "point mass at 10 must satisfy the bound");
    const LogQuadTiltBound unit = check_log_quad_tilt_bound(make_finite_rv({{1.0, 1.0}}), 1.0);
    b.check(unit.holds, "point mass at 1 with a = 1 must satisfy the tilt bound");
    const LogQuadTiltBound z0 = check_log_quad_tilt_bound(make_finite_rv({{0.0, 1.0}}), 2.0);
    b.check(z0.holds && z0.lhs == 0.0 && z0.rhs == 0.0, "point mass at 0 must give 0 <= 0");
  }
  return b.take();
}

BatteryResult battery_robust_mean(std::uint64_t seed) {
  Battery b("robust_mean_properties");
  Rng rng(seed, 104);

  {
    const std::vector<double> xs = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    b.check(median_of_means(xs, 3) == 5.0, "block means (2,5,8) must have median 5");
    const std::vector<double> constant(40, 3.25);
    b.check(robust_mean(constant, 0.3) == 3.25, "constant data must be reproduced exactly");
  }
  {
    std::vector<double> xs(101, 0.0);
    xs[37] = 1e9;
    b.check(median_of_means(xs, 5) == 0.0, "a single huge outlier must be confined to one block");
  }
  {  // equivariances: exact on dyadic data, 1e-12 otherwise
    std::vector<double> xs(64);
    for (double& x : xs) x = std::ldexp(static_cast<double>(rng.next_u64() % 1024), -4);
    std::vector<double> shifted = xs, scaled = xs;
    for (double& x : shifted) x += 2.5;
    for (double& x : scaled) x *= 4.0;
    b.check(median_of_means(shifted, 8) == median_of_means(xs, 8) + 2.5,
            "translation equivariance must be exact on dyadic data");
    b.check(median_of_means(scaled, 8) == 4.0 * median_of_means(xs, 8),
            "scale equivariance must be exact on dyadic data");
    std::vector<double> gs(64);
    for (double& x : gs) x = rng.normal();
    std::vector<double> gshift = gs;
    for (double& x : gshift) x += 0.773;
    b.check(std::abs(median_of_means(gshift, 8) - (median_of_means(gs, 8) + 0.773)) <= 1e-12,
            "translation equivariance drifted beyond 1e-12");
  }
  {  // sub-gaussian deviation band, C = 10
    const double delta = 0.05;
    const std::size_t trials = 1000, n = 200;
    const double sigma = std::sqrt(1.0 / 12.0);
    const double bound = 10.0 * sigma * std::sqrt(std::log(1.0 / delta) / n);
    std::size_t misses = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      std::vector<double> xs(n);
      for (double& x : xs) x = rng.uniform01();
      if (std::abs(robust_mean(xs, delta) - 0.5) > bound) ++misses;
    }
    b.check(static_cast<double>(misses) <= delta * trials,
            "deviation band missed more than a delta fraction of trials");
  }
  {  // sample floor
    bool threw = false;
    try {
      robust_mean(std::vector<double>{1.0, 2.0}, 0.01);
    } catch (const std::exception&) {
      threw = true;
    }
    b.check(threw, "insufficient samples must be rejected");
  }
  return b.take();
}

BatteryResult battery_net_properties(std::uint64_t seed) {
  Battery b("net_properties");
  Rng rng(seed, 105);

  const DirectionNet net2 = build_net(2, 0, 7);
  b.check(net2.count == 4, "d=2 structured net must have 4 directions");
  const DirectionNet net3 = build_net(3, 0, 7);
  b.check(net3.count == 9, "d=3 structured net must have 9 directions");
  const DirectionNet net2x = build_net(2, 100, 1);
  b.check(net2x.count == 104, "d=2 plus 100 extras must have 104 directions");
  bool norms_ok = true;
  for (std::size_t k = 0; k < net2x.count; ++k) {
    double s = 0.0;
    for (double x : net2x.vec(k)) s += x * x;
    norms_ok &= std::abs(std::sqrt(s) - 1.0) <= 1e-12;
  }
  b.check(norms_ok, "every net vector must have unit norm within 1e-12");

  {  // structured evaluations identify symmetric matrices
    const std::size_t d = 6;
    const DirectionNet net = build_net(d, 0, 3);
    const SymmetricMatrix m = random_symmetric(rng, d);
    std::vector<double> evals(net.count);
    for (std::size_t k = 0; k < net.count; ++k) evals[k] = m.quadratic_form(net.vec(k));
    SymmetricMatrix rec(d);
    for (std::size_t i = 0; i < d; ++i) rec.ref(i, i) = evals[i];
    std::size_t k = d;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j, k += 2)
        rec.ref(j, i) = evals[k] - 0.5 * (evals[i] + evals[j]);
    double worst = 0.0;
    for (std::size_t idx = 0; idx < m.packed().size(); ++idx)
      worst = std::max(worst, std::abs(m.packed()[idx] - rec.packed()[idx]));
    b.check(worst <= 1e-12 * std::max(1.0, m.max_abs()),
            "structured net evaluations failed to reconstruct the matrix");
  }

  {  // sup examples
    SymmetricMatrix m(2);
    m.ref(0, 0) = 2.0;
    m.ref(1, 1) = 1.0;
    const auto sup = sup_abs_over_net(
        net2, [&](std::span<const double> v) { return m.quadratic_form(v); });
    b.check(sup.value == 2.0 && sup.index == 0, "diag(2,1) sup must be 2 at e1");
    const auto zero = sup_abs_over_net(net2, [](std::span<const double>) { return 0.0; });
    b.check(zero.value == 0.0 && zero.index == 0, "zero function sup must pick the first direction");
    bool threw = false;
    try {
      sup_abs_over_net(net2, [](std::span<const double>) {
        return std::numeric_limits<double>::quiet_NaN();
      });
    } catch (const std::exception&) {
      threw = true;
    }
    b.check(threw, "non-finite evaluations must be rejected");
  }
  return b.take();
}

BatteryResult battery_form_tables(std::uint64_t seed) {
  Battery b("form_tables");
  Rng rng(seed, 106);

  {  // worked example: d=1, lambda=1, rows (0.5, 2, 0)
    const DirectionNet net = build_net(1, 0, 1);
    const std::vector<double> y = {0.5, 2.0, 0.0};
    const TruncatedFormTable t = truncated_form(y, 3, 1, MatrixPart::diagonal, 1.0, net);
    b.check(std::abs(t.values[0] - 1.25 / 3.0) <= 1e-15,
            "hand example (psi(0.25)+psi(4)+psi(0))/3 failed");
    const TruncatedFormTable off = truncated_form(y, 3, 1, MatrixPart::offdiagonal, 1.0, net);
    b.check(off.values[0] == 0.0, "off part of scalars must vanish");
  }

  const std::size_t d = 6, n = 500;
  const CovarianceSpec spec = build_covariance(d, SpectrumTag::geometric(0.7), 11);
  const MaskedSample s =
      generate_masked_sample(spec, DistTag::gaussian, 0.0, 0.8, n, rng.next_u64());
  const DirectionNet net = build_net(d, 80, rng.next_u64());

  for (MatrixPart part : {MatrixPart::diagonal, MatrixPart::offdiagonal}) {
    const double lambda = 0.37;
    const TruncatedFormTable par = truncated_form(s.y, n, d, part, lambda, net);
    const TruncatedFormTable ser = truncated_form_serial(s.y, n, d, part, lambda, net);
    b.check(par.values == ser.values, "parallel and serial form tables must agree bitwise");
    bool in_range = true, nonneg = true;
    for (double v : par.values) {
      in_range &= std::abs(v) <= 1.0 / lambda + 1e-12;
      if (part == MatrixPart::diagonal) nonneg &= v >= 0.0;
    }
    b.check(in_range, "table values must lie in [-1/lambda, 1/lambda]");
    if (part == MatrixPart::diagonal) b.check(nonneg, "diagonal table values must be nonnegative");
  }

  {  // tiny lambda reproduces the plain empirical form
    const double lambda = 1e-9;
    const TruncatedFormTable t =
        truncated_form(s.y, n, d, MatrixPart::diagonal, lambda, net);
    const std::vector<double> ysq = detail::squared_rows(s.y);
    std::vector<double> q(n);
    bool close = true;
    for (std::size_t k = 0; k < net.count; ++k) {
      detail::direction_forms(s.y, ysq, n, d, MatrixPart::diagonal, net.vec(k), q);
      double mean = 0.0;
      for (double v : q) mean += v;
      mean /= static_cast<double>(n);
      close &= std::abs(t.values[k] - mean) <= 1e-9 * std::max(1.0, std::abs(mean));
    }
    b.check(close, "small-lambda tables must match the untruncated empirical form");
  }

  {  // psi(l*q)/l is nonincreasing in l for q >= 0
    bool monotone = true;
    for (double q : {0.0, 0.1, 1.0, 5.0}) {
      double prev = std::numeric_limits<double>::infinity();
      for (double l = 0.01; l <= 100.0; l *= 1.5) {
        const double val = psi(l * q) / l;
        monotone &= val <= prev + 1e-15;
        prev = val;
      }
    }
    b.check(monotone, "psi(l q)/l must be nonincreasing in l for q >= 0");
  }

  {  // sorted tables: parallel == serial bitwise, sums match the direct route
    const std::vector<double> probe = random_unit(rng, d);
    for (MatrixPart part : {MatrixPart::diagonal, MatrixPart::offdiagonal}) {
      const SortedFormTable a = build_sorted_forms(s.y, n, d, part, net, probe);
      const SortedFormTable c = build_sorted_forms_serial(s.y, n, d, part, net, probe);
      b.check(a.sorted == c.sorted && a.prefix == c.prefix,
              "parallel and serial sorted tables must agree bitwise");
      const std::vector<double> ysq = detail::squared_rows(s.y);
      std::vector<double> q(n);
      bool close = true;
      for (double alpha : {0.0, 0.2, 1.0, 4.0}) {
        const double scale = alpha * alpha;
        for (std::size_t k = 0; k < net.count; k += 17) {
          detail::direction_forms(s.y, ysq, n, d, part, net.vec(k), q);
          double direct = 0.0;
          for (double qi : q) direct += psi(std::clamp(scale * qi, -1e15, 1e15));
          const double fast = a.sum_psi(k, scale);
          close &= std::abs(fast - direct) <= 1e-10 * std::max(1.0, std::abs(direct));
        }
      }
      b.check(close, "sorted-prefix evaluation must match the direct truncated sums");
    }
  }
  return b.take();
}

BatteryResult battery_fit_optimality(std::uint64_t seed) {
  Battery b("fit_optimality");
  Rng rng(seed, 107);

  const DirectionNet net2 = build_net(2, 0, 1);
  const DirectionNet net3 = build_net(3, 0, 1);

  {  // diag fit worked examples on the d=2 structured net
    TruncatedFormTable t;
    t.net = &net2;
    t.part = MatrixPart::diagonal;
    t.lambda = 1.0;
    t.values = {2.0, 3.0, 2.5, 2.5};
    const MinimaxFitResult fit = fit_diagonal(t);
    b.check(std::abs(fit.matrix(0, 0) - 2.0) <= 1e-9 && std::abs(fit.matrix(1, 1) - 3.0) <= 1e-9 &&
                fit.objective <= 1e-9,
            "consistent diagonal table must be fit exactly");

    t.values = {0.0, 0.0, 0.0, 0.0};
    const MinimaxFitResult zero = fit_diagonal(t);
    b.check(zero.matrix.max_abs() == 0.0 && zero.objective == 0.0,
            "all-zero diagonal table must give the zero matrix");

    t.values = {-1.0, 0.0, 0.0, 0.0};
    const MinimaxFitResult neg = fit_diagonal(t);
    b.check(std::abs(neg.matrix(0, 0)) <= 1e-9 && std::abs(neg.objective - 1.0) <= 1e-9,
            "negative diagonal target must clamp at zero with objective 1");
  }

  {  // off fit worked examples
    TruncatedFormTable t;
    t.net = &net2;
    t.part = MatrixPart::offdiagonal;
    t.lambda = 1.0;
    t.values = {0.0, 0.0, 0.4, -0.4};
    const MinimaxFitResult fit = fit_offdiagonal(t);
    b.check(std::abs(fit.matrix(0, 1) - 0.4) <= 1e-9 && fit.objective <= 1e-9,
            "antisymmetric mixed targets must recover the off entry");

    t.values = {0.0, 0.0, 1.0, 1.0};
    const MinimaxFitResult tie = fit_offdiagonal(t);
    b.check(std::abs(tie.matrix(0, 1)) <= 1e-9 && std::abs(tie.objective - 1.0) <= 1e-9,
            "inconsistent mixed targets must settle at zero with objective 1");
  }

  // randomized brute-force equivalence at d <= 3 plus the reference route
  for (int rep = 0; rep < 6; ++rep) {
    const bool use3 = rep % 2 == 1;
    const DirectionNet& net = use3 ? net3 : net2;
    for (MatrixPart part : {MatrixPart::diagonal, MatrixPart::offdiagonal}) {
      TruncatedFormTable t;
      t.net = &net;
      t.part = part;
      t.lambda = 1.0;
      t.values.resize(net.count);
      for (double& v : t.values) v = 2.0 * rng.normal();
      const MinimaxFitResult fit =
          part == MatrixPart::diagonal ? fit_diagonal(t) : fit_offdiagonal(t);
      const MinimaxProblem prob = part == MatrixPart::diagonal ? diagonal_fit_problem(t)
                                                               : offdiagonal_fit_problem(t);
      const double grid_best = brute_force_minimax(prob);
      b.check(fit.objective <= grid_best + 1e-9,
              "exact fit objective must not exceed the grid search optimum");
      b.check(grid_best <= fit.objective + 2e-3,
              "grid search must not beat the fit by more than 2e-3 (got gap " +
                  format_double(grid_best - fit.objective) + ")");
      const MinimaxSolution ref = minimax_subgradient_reference(prob, net.dim);
      b.check(fit.objective <= ref.objective + 1e-9,
              "exact fit must dominate the subgradient reference");
    }
  }
  return b.take();
}

BatteryResult battery_equivariances(std::uint64_t seed) {
  Battery b("equivariances");
  Rng rng(seed, 108);

  const std::size_t d = 4, n = 240;
  const CovarianceSpec spec = build_covariance(d, SpectrumTag::geometric(0.7), 5);
  const MaskedSample s =
      generate_masked_sample(spec, DistTag::gaussian, 0.0, 0.8, n, rng.next_u64());
  const DirectionNet net = build_net(d, 60, rng.next_u64());
  const double delta = 0.1, kappa = analytic_kappa(DistTag::gaussian, 0.0);
  const double trace = spec.summary.trace, opnorm = spec.summary.operator_norm;

  {  // scale equivariance with c = 2 (all rescalings exact in binary)
    const OracleEstimate base =
        oracle_estimate(s.y, n, d, delta, 0.8, trace, opnorm, kappa, net);
    std::vector<double> y2(s.y.size());
    for (std::size_t k = 0; k < s.y.size(); ++k) y2[k] = 2.0 * s.y[k];
    const OracleEstimate scaled =
        oracle_estimate(y2, n, d, delta, 0.8, 4.0 * trace, 4.0 * opnorm, kappa, net);
    double worst = 0.0;
    for (std::size_t k = 0; k < base.sigma_hat.packed().size(); ++k) {
      const double want = 4.0 * base.sigma_hat.packed()[k];
      const double got = scaled.sigma_hat.packed()[k];
      worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
    }
    b.check(worst <= 1e-10, "scale equivariance drifted beyond 1e-10, worst rel err " +
                                format_double(worst));
    b.check(scaled.lambda1 == 0.25 * base.lambda1 && scaled.lambda2 == 0.25 * base.lambda2,
            "truncation levels must scale exactly by 1/c^2");
  }

  {  // permutation equivariance at d=2 (two-term sums commute)
    const std::size_t d2 = 2, n2 = 120;
    const CovarianceSpec spec2 = build_covariance(d2, SpectrumTag::geometric(0.5), 9);
    const MaskedSample s2 =
        generate_masked_sample(spec2, DistTag::gaussian, 0.0, 0.9, n2, rng.next_u64());
    const DirectionNet net_a = build_net(d2, 30, rng.next_u64());
    DirectionNet net_b = net_a;
    for (std::size_t k = 0; k < net_b.count; ++k)
      std::swap(net_b.vectors[k * 2], net_b.vectors[k * 2 + 1]);
    std::vector<double> swapped(s2.y.size());
    for (std::size_t i = 0; i < n2; ++i) {
      swapped[i * 2] = s2.y[i * 2 + 1];
      swapped[i * 2 + 1] = s2.y[i * 2];
    }
    const OracleEstimate ea = oracle_estimate(s2.y, n2, d2, delta, 0.9, spec2.summary.trace,
                                              spec2.summary.operator_norm, kappa, net_a);
    const OracleEstimate eb = oracle_estimate(swapped, n2, d2, delta, 0.9, spec2.summary.trace,
                                              spec2.summary.operator_norm, kappa, net_b);
    const double tol = 1e-12 * std::max(1.0, ea.sigma_hat.max_abs());
    b.check(std::abs(ea.sigma_hat(0, 0) - eb.sigma_hat(1, 1)) <= tol &&
                std::abs(ea.sigma_hat(1, 1) - eb.sigma_hat(0, 0)) <= tol &&
                std::abs(ea.sigma_hat(0, 1) - eb.sigma_hat(0, 1)) <= tol,
            "coordinate swap must permute the estimate");
  }

  {  // all-zero data gives the zero estimate
    std::vector<double> zeros(n * d, 0.0);
    const OracleEstimate e = oracle_estimate(zeros, n, d, delta, 0.8, trace, opnorm, kappa, net);
    b.check(e.sigma_hat.max_abs() == 0.0, "zero data must produce the zero estimate");
  }

  {  // p estimation on dense data; profile identities
    MaskedSample dense = s;
    for (std::size_t k = 0; k < dense.y.size(); ++k) {
      dense.mask[k] = 1;
      if (dense.y[k] == 0.0) dense.y[k] = 1.0;  // make every entry nonzero
    }
    b.check(estimate_p(dense, delta) == 1.0, "fully observed data must give p = 1");

    const DirectionNet net_off = net.with_zero();
    b.check(opnorm_diagnostic(0.0, s, 0.8, net, net_off) == 0.0, "profile must vanish at 0");
    bool nonneg = true;
    double prev = 0.0;
    (void)prev;
    for (double alpha : {1e-3, 0.1, 0.5, 1.0, 3.0})
      nonneg &= opnorm_diagnostic(alpha, s, 0.8, net, net_off) >= 0.0;
    b.check(nonneg, "profile must stay nonnegative");
    // exact scale invariance with c = 2
    std::vector<double> y2(s.y.size());
    for (std::size_t k = 0; k < s.y.size(); ++k) y2[k] = 2.0 * s.y[k];
    MaskedSample s2 = s;
    s2.y = y2;
    bool invariant = true;
    for (double alpha : {0.25, 1.0, 2.5})
      invariant &= opnorm_diagnostic(alpha, s, 0.8, net, net_off) ==
                   opnorm_diagnostic(alpha / 2.0, s2, 0.8, net, net_off);
    b.check(invariant, "profile must be exactly invariant under (y, alpha) -> (2y, alpha/2)");
  }

  {  // truncation level selection
    const Lambdas l = pick_lambdas(10.0, 2.0, 0.5, 1000, 0.1, std::pow(3.0, 0.25));
    const double want = std::sqrt(5.0 + std::log(10.0)) / (std::sqrt(500.0) * 2.0 * std::sqrt(3.0));
    b.check(std::abs(l.lambda1 - want) <= 1e-12, "lambda1 must match the hand computation");
    const Lambdas l1 = pick_lambdas(10.0, 2.0, 1.0, 1000, 0.1, std::pow(3.0, 0.25));
    b.check(l1.lambda1 == l1.lambda2, "levels must coincide at p = 1");
    const Lambdas l4 = pick_lambdas(40.0, 8.0, 0.5, 1000, 0.1, std::pow(3.0, 0.25));
    b.check(l4.lambda1 == 0.25 * l.lambda1 && l4.lambda2 == 0.25 * l.lambda2,
            "scaling (trace, opnorm) by 4 must scale levels by exactly 1/4");
    const Lambdas l2n = pick_lambdas(10.0, 2.0, 0.5, 2000, 0.1, std::pow(3.0, 0.25));
    b.check(std::abs(l2n.lambda1 - l.lambda1 / std::sqrt(2.0)) <= 1e-15,
            "doubling N must scale levels by 1/sqrt(2)");
  }
  return b.take();
}

BatteryResult battery_masked_form_moments(std::uint64_t seed, std::size_t triples,
                                          std::size_t samples) {
  Battery b("masked_form_moments");
  Rng rng(seed, 109);

  for (std::size_t rep = 0; rep < triples; ++rep) {
    const std::size_t d = 3 + rng.next_u64() % 4;
    const SpectrumTag spectra[3] = {SpectrumTag::identity(), SpectrumTag::geometric(0.7),
                                    SpectrumTag::spiked(3.0, 1.0)};
    const CovarianceSpec spec = build_covariance(d, spectra[rng.next_u64() % 3], rng.next_u64());
    const double p = 0.3 + 0.7 * rng.uniform01();
    const bool heavy = rng.uniform01() < 0.5;
    const DistTag dist = heavy ? DistTag::student_t : DistTag::gaussian;
    const double dof = heavy ? 12.0 : 0.0;
    const double kappa4 = std::pow(analytic_kappa(dist, dof), 4.0);

    const MaskedSample s = generate_masked_sample(spec, dist, dof, p, samples, rng.next_u64());
    const std::vector<double> v = random_unit(rng, d);
    const std::vector<double> ysq = detail::squared_rows(s.y);
    std::vector<double> qd(samples), qo(samples);
    detail::direction_forms(s.y, ysq, samples, d, MatrixPart::diagonal, v, qd);
    detail::direction_forms(s.y, ysq, samples, d, MatrixPart::offdiagonal, v, qo);
    for (double& q : qd) q *= q;
    for (double& q : qo) q *= q;

    double diag_norm = 0.0;
    for (std::size_t i = 0; i < d; ++i) diag_norm = std::max(diag_norm, std::abs(spec.sigma(i, i)));
    const double op = spec.summary.operator_norm;

    const double diag_bound = 2.0 * p * kappa4 * diag_norm * diag_norm;
    const double diag_mean = empirical_second_moment_of(qd);
    b.check(diag_mean <= diag_bound + 3.0 * standard_error(qd),
            "diagonal form second moment exceeded 2 p kappa^4 ||Diag||^2 + 3 SE");

    const double off_bound = 4.0 * p * p * kappa4 * op * op;
    const double off_mean = empirical_second_moment_of(qo);
    b.check(off_mean <= off_bound + 3.0 * standard_error(qo),
            "off form second moment exceeded 4 p^2 kappa^4 ||Sigma||^2 + 3 SE");
  }
  return b.take();
}

BatteryResult battery_sub_estimator_bands(std::uint64_t seed) {
  Battery b("sub_estimator_bands");
  Rng rng(seed, 110);

  {  // p and trace bands
    const std::size_t trials = 100, n = 4000, d = 8;
    const double p = 0.7, delta = 0.05;
    const CovarianceSpec spec = build_covariance(d, SpectrumTag::geometric(0.7), 21);
    const double p_bound = 3.0 * p * std::sqrt(std::log(1.0 / delta) / n);
    std::size_t p_hits = 0, tr_hits = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      const MaskedSample s =
          generate_masked_sample(spec, DistTag::gaussian, 0.0, p, n, rng.next_u64());
      const double p_hat = estimate_p(s, delta);
      if (std::abs(p_hat - p) <= p_bound) ++p_hits;
      const double tr = estimate_trace(s, p_hat, delta);
      if (tr >= 0.5 * spec.summary.trace && tr <= 1.5 * spec.summary.trace) ++tr_hits;
    }
    b.check(p_hits >= 95, "p estimate band frequency below 95%: " + std::to_string(p_hits) + "%");
    b.check(tr_hits >= 95, "trace sandwich frequency below 95%: " + std::to_string(tr_hits) + "%");
  }

  {  // operator-norm constant-factor band
    const std::size_t trials = 50, n = 5000, d = 4;
    const CovarianceSpec spec = build_covariance(d, SpectrumTag::spiked(4.0, 1.0), std::nullopt);
    const OpNormConstants constants;
    std::size_t hits = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      const MaskedSample s =
          generate_masked_sample(spec, DistTag::gaussian, 0.0, 1.0, n, rng.next_u64());
      const DirectionNet net = build_net(d, default_extra_random(d), rng.next_u64());
      const OpnormEstimate est = estimate_opnorm(s, 1.0, 0.05, constants, net, rng.next_u64());
      const double ratio = est.opnorm / spec.summary.operator_norm;
      if (ratio >= 0.1 && ratio <= 10.0) ++hits;
    }
    b.check(hits * 100 >= 90 * trials,
            "operator-norm band frequency below 90%: " + std::to_string(hits * 2) + "%");
  }
  return b.take();
}

std::vector<BatteryResult> run_invariant_suite(std::uint64_t seed) {
  std::vector<BatteryResult> out;
  out.push_back(battery_matrix_identities(stream_key(seed, 1)));
  out.push_back(battery_generator_moments(stream_key(seed, 2)));
  out.push_back(battery_truncation_inequalities(stream_key(seed, 3)));
  out.push_back(battery_robust_mean(stream_key(seed, 4)));
  out.push_back(battery_net_properties(stream_key(seed, 5)));
  out.push_back(battery_form_tables(stream_key(seed, 6)));
  out.push_back(battery_fit_optimality(stream_key(seed, 7)));
  out.push_back(battery_equivariances(stream_key(seed, 8)));
  out.push_back(battery_masked_form_moments(stream_key(seed, 9)));
  out.push_back(battery_sub_estimator_bands(stream_key(seed, 10)));
  return out;
}

void print_suite(std::ostream& out, const std::vector<BatteryResult>& results) {
  for (const BatteryResult& r : results) {
    if (r.pass())
      out << r.name << ": PASS (" << r.checks << " checks)\n";
    else {
      out << r.name << ": FAIL (" << r.failures << "/" << r.checks << " checks failed)\n";
      for (const std::string& note : r.notes) out << "  - " << note << "\n";
    }
  }
}

bool suite_passed(const std::vector<BatteryResult>& results) {
  for (const BatteryResult& r : results)
    if (!r.pass()) return false;
  return true;
}

}  // namespace misscov
