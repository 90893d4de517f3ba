// Timings for the hot kernels: serial vs OpenMP sampling, reconstruction,
// the K-term fit and the eigensolver.
//
//   bench_kernels [i_max] [n_sites]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "sshwalk/fitting.hpp"
#include "sshwalk/montecarlo.hpp"
#include "sshwalk/spectral.hpp"

using namespace sshwalk;

namespace {

template <typename F>
double best_of(int reps, F &&f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto start = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  return best;
}

} // namespace

int main(int argc, char **argv) {
  const std::size_t i_max = argc > 1 ? std::stoul(argv[1]) : 1000000;
  const std::size_t n_sites = argc > 2 ? std::stoul(argv[2]) : 10;
  const RateConfig cfg = RateConfig::from_bias(1.0, -0.5);
  const HoppingChain chain = hopping_chain(cfg, n_sites);

  std::printf("sampling i_max=%zu N=%zu\n", i_max, n_sites);
  EscapeTimeEnsemble serial;
  const double t_serial = best_of(3, [&] { serial = sample_ensemble_serial(chain, i_max, {}, 1); });
  std::printf("  serial            %8.3f s\n", t_serial);
  const int max_threads = omp_get_max_threads();
  for (int threads = 1; threads <= max_threads; threads *= 2) {
    omp_set_num_threads(threads);
    EscapeTimeEnsemble parallel;
    const double t = best_of(3, [&] { parallel = sample_ensemble(chain, i_max, {}, 1); });
    std::printf("  openmp %3d threads %8.3f s  speedup %5.2f  identical=%s\n", threads, t, t_serial / t,
                parallel.times == serial.times ? "yes" : "NO");
  }
  omp_set_num_threads(max_threads);

  serial.rescale(cfg.total_rate(), "1/(2 gamma_bar)");
  ReconstructedCurve curve;
  const double t_rec = best_of(5, [&] { curve = reconstruct_integrated_etd(serial); });
  std::printf("reconstruct         %8.4f s  (%zu points)\n", t_rec, curve.points.size());

  for (std::size_t k = 1; k <= 5; ++k) {
    FitResult fit;
    const double t = best_of(3, [&] { fit = fit_integrated_etd(curve, k); });
    std::printf("fit K=%zu             %8.4f s  residual %.3e\n", k, t, fit.residual);
  }

  for (std::size_t n : {10u, 100u, 1000u}) {
    const ChainGenerator g = build_ssh_generator(cfg, n);
    const double t = best_of(3, [&] { (void)eigendecompose(g); });
    std::printf("eigendecompose N=%-4zu %8.4f s\n", n, t);
  }
  return 0;
}
