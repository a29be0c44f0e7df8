#include "misscov/sampling.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "misscov/direction_net.hpp"
#include "misscov/rng.hpp"
#include "misscov/text_format.hpp"

namespace misscov {

std::string dist_to_string(DistTag tag, double dof) {
  if (tag == DistTag::gaussian) return "gaussian";
  return "student_t(" + format_double(dof) + ")";
}

void dist_from_string(const std::string& text, DistTag& tag, double& dof) {
  if (text == "gaussian") {
    tag = DistTag::gaussian;
    dof = 0.0;
    return;
  }
  if (text.rfind("student_t(", 0) == 0 && text.back() == ')') {
    tag = DistTag::student_t;
    dof = parse_double(text.substr(10, text.size() - 11));
    if (!(dof > 4.0)) throw std::invalid_argument("student_t requires dof > 4");
    return;
  }
  throw std::invalid_argument("unknown distribution '" + text +
                              "' (expected gaussian | student_t(<dof>))");
}

double analytic_kappa(DistTag tag, double dof) {
  if (tag == DistTag::gaussian) return std::pow(3.0, 0.25);
  if (!(dof > 4.0)) throw std::invalid_argument("analytic_kappa: student_t requires dof > 4");
  return std::pow(3.0 * (dof - 2.0) / (dof - 4.0), 0.25);
}

namespace {

void apply_sqrt_sigma(const CovarianceSpec& spec, const std::vector<double>& z, std::size_t n,
                      std::vector<double>& out) {
  const std::size_t d = spec.sigma.dim();
  std::vector<double> row(d);
  for (std::size_t i = 0; i < n; ++i) {
    spec.sqrt_sigma.matvec({z.data() + i * d, d}, row);
    for (std::size_t j = 0; j < d; ++j) out[i * d + j] = row[j];
  }
}

}  // namespace

std::vector<double> sample_gaussian(const CovarianceSpec& spec, std::size_t n,
                                    std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample_gaussian: n must be >= 1");
  const std::size_t d = spec.sigma.dim();
  Rng rng(seed, kStreamData);
  std::vector<double> z(n * d);
  for (double& v : z) v = rng.normal();
  std::vector<double> x(n * d);
  apply_sqrt_sigma(spec, z, n, x);
  return x;
}

std::vector<double> sample_student_t(const CovarianceSpec& spec, double dof, std::size_t n,
                                     std::uint64_t seed) {
  if (!(dof > 4.0)) throw std::invalid_argument("sample_student_t: fourth moment does not exist");
  if (n == 0) throw std::invalid_argument("sample_student_t: n must be >= 1");
  const std::size_t d = spec.sigma.dim();
  Rng rng(seed, kStreamData);
  std::vector<double> z(n * d);
  std::vector<double> scale(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) z[i * d + j] = rng.normal();
    const double w = rng.chi_square(dof);
    scale[i] = std::sqrt((dof - 2.0) / w);
  }
  std::vector<double> x(n * d);
  apply_sqrt_sigma(spec, z, n, x);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) x[i * d + j] *= scale[i];
  return x;
}

MaskedSample sparsify(std::span<const double> x, std::size_t n, std::size_t d, double p,
                      std::uint64_t seed) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("sparsify: p must lie in (0,1]");
  if (x.size() != n * d) throw std::invalid_argument("sparsify: shape mismatch");
  MaskedSample s;
  s.n = n;
  s.d = d;
  s.true_p = p;
  s.seed = seed;
  s.y.assign(x.begin(), x.end());
  s.mask.assign(n * d, 1);
  Rng rng(seed, kStreamMask);
  for (std::size_t k = 0; k < n * d; ++k) {
    if (rng.uniform01() < p) continue;
    s.y[k] = 0.0;
    s.mask[k] = 0;
  }
  return s;
}

MaskedSample generate_masked_sample(const CovarianceSpec& spec, DistTag dist, double dof, double p,
                                    std::size_t n, std::uint64_t seed) {
  const std::vector<double> x = dist == DistTag::gaussian
                                    ? sample_gaussian(spec, n, seed)
                                    : sample_student_t(spec, dof, n, seed);
  MaskedSample s = sparsify(x, n, spec.sigma.dim(), p, seed);
  s.dist = dist;
  s.dof = dist == DistTag::student_t ? dof : 0.0;
  s.seed = seed;
  return s;
}

double audit_kappa(std::span<const double> x, std::size_t n, std::size_t d,
                   const DirectionNet& net) {
  if (n < 100) throw std::invalid_argument("audit_kappa: need at least 100 samples");
  if (x.size() != n * d || net.dim != d) throw std::invalid_argument("audit_kappa: shape mismatch");
  double worst = 0.0;
  for (std::size_t k = 0; k < net.count; ++k) {
    const auto v = net.vec(k);
    double m2 = 0.0, m4 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j) dot += x[i * d + j] * v[j];
      const double sq = dot * dot;
      m2 += sq;
      m4 += sq * sq;
    }
    m2 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    if (m2 <= 0.0) throw std::runtime_error("audit_kappa: degenerate marginal");
    worst = std::max(worst, std::pow(m4, 0.25) / std::sqrt(m2));
  }
  return worst;
}

void save_dataset(const std::string& path, const MaskedSample& sample) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << sample.n << ' ' << sample.d << ' ' << format_double(sample.true_p) << ' ' << sample.seed
    << ' ' << dist_to_string(sample.dist, sample.dof) << "\n";
  for (std::size_t i = 0; i < sample.n; ++i) {
    for (std::size_t j = 0; j < sample.d; ++j) {
      if (j) f << ' ';
      f << format_double(sample.y[i * sample.d + j]);
    }
    f << "\n";
  }
}

MaskedSample load_dataset(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  MaskedSample s;
  std::string dist_text;
  if (!(f >> s.n >> s.d >> s.true_p >> s.seed >> dist_text))
    throw std::runtime_error("dataset load: bad header (want 'N d p seed dist')");
  if (s.n == 0 || s.d == 0) throw std::runtime_error("dataset load: empty shape");
  if (!(s.true_p > 0.0 && s.true_p <= 1.0)) throw std::runtime_error("dataset load: p outside (0,1]");
  dist_from_string(dist_text, s.dist, s.dof);
  s.y.resize(s.n * s.d);
  for (std::size_t k = 0; k < s.n * s.d; ++k)
    if (!(f >> s.y[k])) throw std::runtime_error("dataset load: truncated rows");
  double extra;
  if (f >> extra) throw std::runtime_error("dataset load: trailing data beyond N rows");
  s.mask.resize(s.n * s.d);
  for (std::size_t k = 0; k < s.n * s.d; ++k) s.mask[k] = s.y[k] != 0.0 ? 1 : 0;
  return s;
}

}  // namespace misscov
