// Timings for the OpenMP kernels against their serial references, plus one
// full pipeline estimate. Build and run manually:
//   cmake --build build --target misscov_bench && ./build/bench/misscov_bench [threads]

#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "misscov/covariance_model.hpp"
#include "misscov/pipeline.hpp"
#include "misscov/quadform.hpp"
#include "misscov/sampling.hpp"

using namespace misscov;

namespace {

template <typename Fn>
double time_best_of(int reps, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (dt < best) best = dt;
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
#ifdef _OPENMP
  if (argc > 1) omp_set_num_threads(std::atoi(argv[1]));
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  (void)argc;
  (void)argv;
  std::printf("threads: 1 (no OpenMP)\n");
#endif

  struct Case {
    std::size_t d;
    std::size_t n;
  };
  const Case cases[] = {{10, 2000}, {10, 8000}, {20, 4000}};

  std::printf("%-28s %10s %10s %8s\n", "kernel", "serial[s]", "openmp[s]", "speedup");
  for (const Case& c : cases) {
    const CovarianceSpec spec = build_covariance(c.d, SpectrumTag::geometric(0.7), 1);
    const MaskedSample s = generate_masked_sample(spec, DistTag::gaussian, 0.0, 0.8, c.n, 42);
    const DirectionNet net = build_net(c.d, default_extra_random(c.d), 7);
    const double lambda = 0.05;

    const double ser = time_best_of(3, [&] {
      (void)truncated_form_serial(s.y, c.n, c.d, MatrixPart::offdiagonal, lambda, net);
    });
    const double par = time_best_of(3, [&] {
      (void)truncated_form(s.y, c.n, c.d, MatrixPart::offdiagonal, lambda, net);
    });
    std::printf("truncated_form d=%-3zu N=%-6zu %10.4f %10.4f %7.2fx\n", c.d, c.n, ser, par,
                ser / par);

    const double sser = time_best_of(3, [&] {
      (void)build_sorted_forms_serial(s.y, c.n, c.d, MatrixPart::diagonal, net);
    });
    const double spar = time_best_of(3, [&] {
      (void)build_sorted_forms(s.y, c.n, c.d, MatrixPart::diagonal, net);
    });
    std::printf("sorted_forms   d=%-3zu N=%-6zu %10.4f %10.4f %7.2fx\n", c.d, c.n, sser, spar,
                sser / spar);
  }

  {
    const CovarianceSpec spec = build_covariance(10, SpectrumTag::geometric(0.7), 1);
    const MaskedSample s = generate_masked_sample(spec, DistTag::gaussian, 0.0, 0.8, 8000, 42);
    EstimatorConfig config;
    const double t = time_best_of(2, [&] { (void)estimate_covariance(s, config); });
    std::printf("full pipeline  d=10  N=8000  %10.4f (per estimate)\n", t);
  }
  return 0;
}
