#include <doctest.h>

#include <cmath>
#include <sstream>

#include "misscov/eigen_jacobi.hpp"
#include "misscov/matrix_io.hpp"
#include "misscov/rng.hpp"
#include "misscov/symmetric_matrix.hpp"

using namespace misscov;

namespace {
SymmetricMatrix make2(double a, double b, double c) {
  SymmetricMatrix m(2);
  m.ref(0, 0) = a;
  m.ref(1, 0) = b;
  m.ref(1, 1) = c;
  return m;
}
}  // namespace

TEST_CASE("diag and off parts") {
  const SymmetricMatrix m = make2(1, 2, 3);
  const SymmetricMatrix d = m.diag_part();
  CHECK(d(0, 0) == 1.0);
  CHECK(d(0, 1) == 0.0);
  CHECK(d(1, 1) == 3.0);
  const SymmetricMatrix o = m.off_part();
  CHECK(o(0, 0) == 0.0);
  CHECK(o(0, 1) == 2.0);
  CHECK(o(1, 1) == 0.0);

  const SymmetricMatrix id = SymmetricMatrix::identity(4);
  CHECK(id.diag_part().packed() == id.packed());
  CHECK(id.off_part().max_abs() == 0.0);

  const SymmetricMatrix anti = make2(0, 5, 0);
  CHECK(anti.diag_part().max_abs() == 0.0);

  // decomposition identity, exact
  Rng rng(99);
  for (int rep = 0; rep < 10; ++rep) {
    SymmetricMatrix r(6);
    for (double& v : r.packed()) v = rng.normal();
    const SymmetricMatrix dd = r.diag_part();
    const SymmetricMatrix oo = r.off_part();
    for (std::size_t k = 0; k < r.packed().size(); ++k)
      CHECK(dd.packed()[k] + oo.packed()[k] == r.packed()[k]);
  }
}

TEST_CASE("eigh closed forms and round trip") {
  SymmetricMatrix m(2);
  m.ref(0, 0) = 3.0;
  m.ref(1, 1) = 1.0;
  const EighResult r = eigh(m);
  CHECK(r.eigenvalues[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(r.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(r.eigenvectors[0]) == doctest::Approx(1.0));

  const SymmetricMatrix flip = make2(0, 1, 0);
  const EighResult rf = eigh(flip);
  CHECK(rf.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rf.eigenvalues[1] == doctest::Approx(-1.0).epsilon(1e-12));

  Rng rng(7);
  SymmetricMatrix big(5);
  for (double& v : big.packed()) v = rng.normal();
  const EighResult rb = eigh(big);
  double resid = 0.0;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      double rec = 0.0;
      for (std::size_t k = 0; k < 5; ++k)
        rec += rb.eigenvectors[i * 5 + k] * rb.eigenvalues[k] * rb.eigenvectors[j * 5 + k];
      resid += (rec - big(i, j)) * (rec - big(i, j));
    }
  CHECK(std::sqrt(resid) <= 1e-9 * (1.0 + big.frobenius_norm()));
}

TEST_CASE("operator norm") {
  SymmetricMatrix m(2);
  m.ref(0, 0) = 2.0;
  m.ref(1, 1) = 1.0;
  CHECK(operator_norm(m) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(operator_norm(make2(0, 1, 0)) == doctest::Approx(1.0).epsilon(1e-12));

  Rng rng(13);
  SymmetricMatrix r(4);
  for (double& v : r.packed()) v = rng.normal();
  SymmetricMatrix scaled = r;
  scaled.scale(-2.5);
  CHECK(operator_norm(scaled) == doctest::Approx(2.5 * operator_norm(r)).epsilon(1e-10));
}

TEST_CASE("spectral summary") {
  CHECK(spectral_summary(SymmetricMatrix::identity(10)).effective_rank ==
        doctest::Approx(10.0).epsilon(1e-12));

  SymmetricMatrix spiked(5);
  spiked.ref(0, 0) = 4.0;
  for (std::size_t i = 1; i < 5; ++i) spiked.ref(i, i) = 1.0;
  CHECK(spectral_summary(spiked).effective_rank == doctest::Approx(2.0).epsilon(1e-12));

  // geometric spectrum: r -> 1/(1 - gamma) for large d
  const std::size_t d = 60;
  const double gamma = 0.9;
  SymmetricMatrix geo(d);
  double lam = 1.0;
  for (std::size_t i = 0; i < d; ++i, lam *= gamma) geo.ref(i, i) = lam;
  const double want = (1.0 - std::pow(gamma, static_cast<double>(d))) / (1.0 - gamma);
  CHECK(spectral_summary(geo).effective_rank == doctest::Approx(want).epsilon(1e-10));
  CHECK(spectral_summary(geo).effective_rank == doctest::Approx(10.0).epsilon(0.02));

  CHECK_THROWS(spectral_summary(SymmetricMatrix(3)));

  // effective rank of a PSD matrix lies in [1, d]
  Rng rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t dim = 2 + rng.next_u64() % 7;
    SymmetricMatrix root(dim);
    for (double& v : root.packed()) v = rng.normal();
    SymmetricMatrix psd(dim);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < dim; ++k) s += root(i, k) * root(j, k);
        psd.ref(i, j) = s;
      }
    const double r = spectral_summary(psd).effective_rank;
    CHECK(r >= 1.0 - 1e-12);
    CHECK(r <= static_cast<double>(dim) + 1e-12);
  }
}

TEST_CASE("matrix fixture io") {
  Rng rng(21);
  SymmetricMatrix m(4);
  for (double& v : m.packed()) v = rng.normal();
  std::stringstream s;
  write_matrix(s, m);
  const SymmetricMatrix back = read_matrix(s);
  CHECK(back.packed() == m.packed());  // shortest round-trip decimals

  std::stringstream bad("2\n1 2\n2.1 1\n");
  CHECK_THROWS_WITH_AS(read_matrix(bad), doctest::Contains("asymmetry"), std::runtime_error);

  std::stringstream nan_in("1\nnan\n");
  CHECK_THROWS(read_matrix(nan_in));
}
