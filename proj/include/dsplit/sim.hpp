#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "dsplit/model.hpp"
#include "dsplit/ridge.hpp"
#include "dsplit/solver.hpp"

namespace dsplit {

// Multiplicative uniform jitter on timings: an affected value v is replaced
// by a draw from [v(1-p), v(1+p)].
struct NoiseModel {
  enum class Applies { comm, local, both };
  enum class Redraw {
    per_event,  // fresh draw for every communication round / compute phase
    per_run     // one draw of the whole TimingModel, held for the run
  };

  double rel_amplitude = 0.0;  // p
  Applies applies_to = Applies::both;
  Redraw redraw = Redraw::per_event;
  std::uint64_t seed = 0;

  void validate() const;
};

// One timing draw, fully determined by (noise.seed, draw_index). Draw order:
// tau_comm first, then tau_local[0..n-1].
TimingModel sample_timing(const TimingModel& nominal, const NoiseModel& noise,
                          std::uint64_t draw_index);

struct SimResult {
  double sim_time = 0.0;
  long long outer_iters = 0;   // K actually run
  double inner_iters = 0.0;    // total inner-solver iterations / work units
  double final_grad_norm = 0.0;
  bool converged = false;
  Allocation allocation;
};

// Clock accounting for known iteration counts: each outer iteration costs
// two device-parallel passes plus two communications, each inner unit costs
// one server pass. Equals total_time(...) with two_k_outer = 2*outer.
double sim_clock(const Allocation& alloc, const TimingModel& timing,
                 long long outer_iters, double inner_units);

struct SimOptions {
  InnerSolver inner;
  std::uint64_t shard_seed = 0;
  std::optional<NoiseModel> noise;
};

// Shards the problem per alloc, runs the accelerated extragradient loop to
// the relative tolerance consts.eps (from x0 = 0), and accounts the clock.
// With noise set, timings are redrawn per event (or once per run) while the
// iterates themselves are unaffected -- timings never enter the math.
SimResult simulate_run(const RidgeProblem& problem, const Allocation& alloc,
                       const TimingModel& timing, const ProblemConstants& consts,
                       const AlgParams& params, const SimOptions& opts = {});

// baseline.sim_time / candidate.sim_time
double speedup(const SimResult& baseline, const SimResult& candidate);

struct MomentEstimate {
  double mean = 0.0;
  double variance = 0.0;
  long long n_samples = 0;
  double ci_halfwidth = 0.0;  // 95%, normal approximation
};

// D[XY] for independent X, Y: DX*DY + DX*EY^2 + DY*EX^2
double var_product(double dx, double ex, double dy, double ey);

// E[X^p] for X ~ U[lo, hi], by a 1024-point midpoint rule (exact enough to
// feed the variance formulas without sampling error).
double uniform_power_moment(double lo, double hi, double p);

// mean/variance of X^p for X ~ U[lo, hi] via the quadrature moments
MomentEstimate uniform_power_stats(double lo, double hi, double p);

// D[F(b1_min)] in the large-communication regime: the deterministic factor
// alpha^{4/5} beta^{1/5} (4^{1/5} + 4^{-4/5}) multiplies the random product
// (tau_comm)^{4/5} (tau_1)^{1/5}, so its square scales the product variance.
double theoretical_var_large_comm(const DerivedRates& rates,
                                  const MomentEstimate& m_comm_pow45,
                                  const MomentEstimate& m_loc_pow15);

// D[F(b1_0)] in the small-communication regime: only tau_comm is random and
// enters affinely, with slope alpha*((tau1+s)/(N*s))^{1/4}.
double theoretical_var_small_comm(const DerivedRates& rates,
                                  const TimingModel& timing, double var_comm,
                                  long long n_total);

// Monte Carlo over independent draws; fn receives the stream seed
// mix_seed(seed, draw_index). OpenMP-parallel with a slot per draw and
// pairwise reduction, so the estimate is identical at any thread count.
MomentEstimate monte_carlo(const std::function<double(std::uint64_t)>& fn,
                           long long n_draws, std::uint64_t seed);

// serial reference implementation (same result bit-for-bit)
MomentEstimate monte_carlo_serial(
    const std::function<double(std::uint64_t)>& fn, long long n_draws,
    std::uint64_t seed);

MomentEstimate moments_of(const std::vector<double>& values);

// Percentile bootstrap CI for the sample variance of `values`.
std::pair<double, double> bootstrap_variance_ci(
    const std::vector<double>& values, int n_boot, std::uint64_t seed,
    double level = 0.95);

}  // namespace dsplit
