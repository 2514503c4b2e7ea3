// Benchmark of the OpenMP Monte Carlo kernels against their serial reference
// implementations. Both paths must produce bit-identical estimates; the
// point of this binary is to show the wall-clock gap.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "dsplit/parallel.hpp"
#include "dsplit/sim.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

template <typename F>
void bench_pair(const char* name, long long draws, std::uint64_t seed, F fn) {
  const auto t0 = clock_type::now();
  const dsplit::MomentEstimate serial =
      dsplit::monte_carlo_serial(fn, draws, seed);
  const double ts = seconds_since(t0);

  const auto t1 = clock_type::now();
  const dsplit::MomentEstimate parallel = dsplit::monte_carlo(fn, draws, seed);
  const double tp = seconds_since(t1);

  const bool identical =
      serial.mean == parallel.mean && serial.variance == parallel.variance;
  std::printf("%-22s draws=%lld serial=%.3fs parallel=%.3fs speedup=%.2fx %s\n",
              name, draws, ts, tp, ts / tp,
              identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  long long draws = 2000000;
  if (argc > 1) draws = std::stoll(argv[1]);
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (OpenMP off)\n");
#endif

  bench_pair("uniform moment", draws, 42, [](std::uint64_t stream) {
    std::mt19937_64 rng(stream);
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  });

  bench_pair("noisy-cost law", draws, 43, [](std::uint64_t stream) {
    std::mt19937_64 rng(stream);
    std::uniform_real_distribution<double> comm(0.5e10, 1.5e10);
    std::uniform_real_distribution<double> loc(0.5, 1.5);
    return std::pow(comm(rng), 0.8) * std::pow(loc(rng), 0.2);
  });

  // heavier per-draw work: a small simulated clock over 21 devices
  dsplit::Allocation alloc;
  alloc.b.assign(21, 95);
  alloc.b[0] = 100;
  dsplit::TimingModel tm;
  tm.tau_local.assign(21, 4.0);
  tm.tau_local[0] = 1.0;
  tm.tau_comm = 1e8;
  dsplit::NoiseModel noise;
  noise.rel_amplitude = 0.3;
  noise.seed = 7;
  bench_pair("paired clock draw", draws / 4, 44, [&](std::uint64_t stream) {
    const dsplit::TimingModel drawn = dsplit::sample_timing(tm, noise, stream);
    return dsplit::sim_clock(alloc, drawn, 40, 200.0);
  });

  return 0;
}
