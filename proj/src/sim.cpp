#include "dsplit/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "dsplit/parallel.hpp"

namespace dsplit {

void NoiseModel::validate() const {
  if (!(rel_amplitude >= 0.0) || !(rel_amplitude <= 1.0))
    throw std::invalid_argument("noise: rel_amplitude must be in [0, 1]");
}

namespace {

double draw_jitter(double v, double p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(v * (1.0 - p), v * (1.0 + p));
  return d(rng);
}

bool affects_comm(const NoiseModel& n) {
  return n.applies_to != NoiseModel::Applies::local;
}

bool affects_local(const NoiseModel& n) {
  return n.applies_to != NoiseModel::Applies::comm;
}

}  // namespace

TimingModel sample_timing(const TimingModel& nominal, const NoiseModel& noise,
                          std::uint64_t draw_index) {
  noise.validate();
  std::mt19937_64 rng(mix_seed(noise.seed, draw_index));
  const double p = noise.rel_amplitude;
  TimingModel out = nominal;
  if (affects_comm(noise)) out.tau_comm = draw_jitter(nominal.tau_comm, p, rng);
  if (affects_local(noise))
    for (double& t : out.tau_local) t = draw_jitter(t, p, rng);
  return out;
}

double sim_clock(const Allocation& alloc, const TimingModel& timing,
                 long long outer_iters, double inner_units) {
  if (alloc.n() != timing.n())
    throw std::invalid_argument("sim_clock: allocation/timing size mismatch");
  if (outer_iters < 0 || inner_units < 0.0)
    throw std::invalid_argument("sim_clock: counts must be >= 0");
  double max_pass = 0.0;
  for (int i = 0; i < alloc.n(); ++i)
    max_pass = std::max(max_pass,
                        timing.tau_local[static_cast<std::size_t>(i)] *
                            static_cast<double>(alloc.b[static_cast<std::size_t>(i)]));
  const double server_pass =
      timing.tau_local.front() * static_cast<double>(alloc.b1());
  return static_cast<double>(outer_iters) * (2.0 * max_pass + 2.0 * timing.tau_comm) +
         inner_units * server_pass;
}

SimResult simulate_run(const RidgeProblem& problem, const Allocation& alloc,
                       const TimingModel& timing, const ProblemConstants& consts,
                       const AlgParams& params, const SimOptions& opts) {
  alloc.validate();
  consts.validate();
  if (alloc.n() != timing.n())
    throw std::invalid_argument("simulate_run: allocation/timing size mismatch");
  if (opts.noise) opts.noise->validate();

  ShardSet shards = shard(problem.data, alloc, opts.shard_seed);
  CompositeObjective obj(problem, shards.shards.front());
  StopRule stop{consts.eps, 0.0};
  SolveResult sol = accel_extragradient(obj, params, opts.inner,
                                        Eigen::VectorXd::Zero(obj.dim()), stop);

  SimResult r;
  r.outer_iters = sol.outer_iters;
  r.inner_iters = sol.inner_total;
  r.final_grad_norm = sol.final_grad_norm;
  r.converged = sol.converged;
  r.allocation = alloc;

  // Timings never enter the iterates, only the clock.
  if (!opts.noise || opts.noise->rel_amplitude == 0.0) {
    r.sim_time = sim_clock(alloc, timing, sol.outer_iters, sol.inner_total);
    return r;
  }
  const NoiseModel& noise = *opts.noise;
  if (noise.redraw == NoiseModel::Redraw::per_run) {
    r.sim_time = sim_clock(alloc, sample_timing(timing, noise, 0),
                           sol.outer_iters, sol.inner_total);
    return r;
  }
  // per-event jitter: every communication round and every device computation
  // gets a fresh draw from one sequential stream
  std::mt19937_64 rng(mix_seed(noise.seed, 1));
  const double p = noise.rel_amplitude;
  const bool jc = affects_comm(noise);
  const bool jl = affects_local(noise);
  const double b1 = static_cast<double>(alloc.b1());
  double t = 0.0;
  for (const IterRecord& rec : sol.trace) {
    for (int round = 0; round < 2; ++round) {
      double max_pass = 0.0;
      for (int i = 0; i < alloc.n(); ++i) {
        double tau = timing.tau_local[static_cast<std::size_t>(i)];
        if (jl) tau = draw_jitter(tau, p, rng);
        max_pass = std::max(
            max_pass, tau * static_cast<double>(alloc.b[static_cast<std::size_t>(i)]));
      }
      double tc = timing.tau_comm;
      if (jc) tc = draw_jitter(tc, p, rng);
      t += max_pass + tc;
    }
    // inner work: one event per whole unit, the trailing fraction prorated
    const double u = rec.inner_units;
    const long long events = static_cast<long long>(std::ceil(u));
    for (long long e = 0; e < events; ++e) {
      const double w = std::min(1.0, u - static_cast<double>(e));
      double tau = timing.tau_local.front();
      if (jl) tau = draw_jitter(tau, p, rng);
      t += w * tau * b1;
    }
  }
  r.sim_time = t;
  return r;
}

double speedup(const SimResult& baseline, const SimResult& candidate) {
  if (candidate.sim_time == 0.0)
    throw std::invalid_argument("speedup: candidate time is zero");
  return baseline.sim_time / candidate.sim_time;
}

double var_product(double dx, double ex, double dy, double ey) {
  if (dx < 0.0 || dy < 0.0)
    throw std::invalid_argument("var_product: variances must be >= 0");
  return dx * dy + dx * ey * ey + dy * ex * ex;
}

double uniform_power_moment(double lo, double hi, double p) {
  if (!(lo >= 0.0) || !(hi >= lo))
    throw std::invalid_argument("uniform_power_moment: need 0 <= lo <= hi");
  if (lo == hi) return std::pow(lo, p);
  constexpr int kPoints = 1024;
  const double h = (hi - lo) / kPoints;
  double acc = 0.0;
  for (int i = 0; i < kPoints; ++i)
    acc += std::pow(lo + (i + 0.5) * h, p);
  return acc / kPoints;
}

MomentEstimate uniform_power_stats(double lo, double hi, double p) {
  MomentEstimate m;
  m.mean = uniform_power_moment(lo, hi, p);
  // degenerate interval: exactly zero variance (pow(x,2p) - pow(x,p)^2 would
  // leave ulp-level residue)
  m.variance = lo == hi ? 0.0
                        : std::max(0.0, uniform_power_moment(lo, hi, 2.0 * p) -
                                            m.mean * m.mean);
  return m;
}

double theoretical_var_large_comm(const DerivedRates& rates,
                                  const MomentEstimate& m_comm_pow45,
                                  const MomentEstimate& m_loc_pow15) {
  const double coeff = std::pow(rates.alpha, 0.8) * std::pow(rates.beta, 0.2) *
                       (std::pow(4.0, 0.2) + std::pow(4.0, -0.8));
  return coeff * coeff *
         var_product(m_comm_pow45.variance, m_comm_pow45.mean,
                     m_loc_pow15.variance, m_loc_pow15.mean);
}

double theoretical_var_small_comm(const DerivedRates& rates,
                                  const TimingModel& timing, double var_comm,
                                  long long n_total) {
  timing.validate();
  if (timing.n() < 2)
    throw std::invalid_argument("theoretical_var_small_comm: need workers");
  if (var_comm < 0.0)
    throw std::invalid_argument("theoretical_var_small_comm: var_comm < 0");
  if (n_total < 1)
    throw std::invalid_argument("theoretical_var_small_comm: n_total < 1");
  double inv_sum = 0.0;
  for (std::size_t i = 1; i < timing.tau_local.size(); ++i)
    inv_sum += 1.0 / timing.tau_local[i];
  const double s = 1.0 / inv_sum;
  const double coeff =
      rates.alpha * std::pow((timing.tau_local.front() + s) /
                                 (static_cast<double>(n_total) * s),
                             0.25);
  return coeff * coeff * var_comm;
}

namespace {

MomentEstimate moments_from_slots(std::vector<double>& vals) {
  const std::size_t n = vals.size();
  MomentEstimate m;
  m.n_samples = static_cast<long long>(n);
  m.mean = pairwise_sum(vals) / static_cast<double>(n);
  for (double& v : vals) {
    const double d = v - m.mean;
    v = d * d;
  }
  m.variance = pairwise_sum(vals) / static_cast<double>(n - 1);
  m.ci_halfwidth = 1.959963984540054 *
                   std::sqrt(m.variance / static_cast<double>(n));
  return m;
}

MomentEstimate monte_carlo_impl(const std::function<double(std::uint64_t)>& fn,
                                long long n_draws, std::uint64_t seed,
                                bool parallel) {
  if (n_draws < 2)
    throw std::invalid_argument("monte_carlo: n_draws must be >= 2");
  std::vector<double> vals(static_cast<std::size_t>(n_draws));
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n_draws; ++i)
      vals[static_cast<std::size_t>(i)] =
          fn(mix_seed(seed, static_cast<std::uint64_t>(i)));
  } else {
    for (long long i = 0; i < n_draws; ++i)
      vals[static_cast<std::size_t>(i)] =
          fn(mix_seed(seed, static_cast<std::uint64_t>(i)));
  }
  return moments_from_slots(vals);
}

}  // namespace

MomentEstimate monte_carlo(const std::function<double(std::uint64_t)>& fn,
                           long long n_draws, std::uint64_t seed) {
  return monte_carlo_impl(fn, n_draws, seed, true);
}

MomentEstimate monte_carlo_serial(
    const std::function<double(std::uint64_t)>& fn, long long n_draws,
    std::uint64_t seed) {
  return monte_carlo_impl(fn, n_draws, seed, false);
}

MomentEstimate moments_of(const std::vector<double>& values) {
  if (values.size() < 2)
    throw std::invalid_argument("moments_of: need at least 2 values");
  std::vector<double> copy = values;
  return moments_from_slots(copy);
}

std::pair<double, double> bootstrap_variance_ci(
    const std::vector<double>& values, int n_boot, std::uint64_t seed,
    double level) {
  const std::size_t n = values.size();
  if (n < 2) throw std::invalid_argument("bootstrap: need at least 2 values");
  if (n_boot < 10) throw std::invalid_argument("bootstrap: n_boot too small");
  if (!(level > 0.0) || !(level < 1.0))
    throw std::invalid_argument("bootstrap: level must be in (0, 1)");
  std::vector<double> boot(static_cast<std::size_t>(n_boot));
#pragma omp parallel for schedule(static)
  for (int b = 0; b < n_boot; ++b) {
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(b)));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = values[pick(rng)];
      sum += v;
      sumsq += v * v;
    }
    const double mean = sum / static_cast<double>(n);
    boot[static_cast<std::size_t>(b)] =
        std::max(0.0, (sumsq - static_cast<double>(n) * mean * mean) /
                          static_cast<double>(n - 1));
  }
  std::sort(boot.begin(), boot.end());
  const double tail = 0.5 * (1.0 - level);
  auto pick_q = [&](double q) {
    const double pos = q * static_cast<double>(n_boot - 1);
    const std::size_t idx = static_cast<std::size_t>(std::llround(pos));
    return boot[std::min(idx, boot.size() - 1)];
  };
  return {pick_q(tail), pick_q(1.0 - tail)};
}

}  // namespace dsplit
