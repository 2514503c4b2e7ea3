#include "dsplit/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "dsplit/parallel.hpp"

namespace dsplit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string cell_opt(double v) { return std::isnan(v) ? "" : csv_num(v); }

double pow10i(int l) { return std::pow(10.0, static_cast<double>(l)); }

}  // namespace

RunConfig RunConfig::from_config(const Config& cfg) {
  RunConfig rc;
  const std::string src = cfg.get_str("data.source", "synthetic");
  if (src == "synthetic")
    rc.source = Source::synthetic;
  else if (src == "libsvm")
    rc.source = Source::libsvm;
  else
    throw ConfigError("data.source: expected 'synthetic' or 'libsvm'");
  rc.data_path = cfg.get_str("data.path", "");
  rc.n_samples = cfg.get_int("data.n", rc.n_samples);
  rc.dim = static_cast<int>(cfg.get_int("data.dim", rc.dim));
  rc.data_noise_sd = cfg.get_num("data.noise_sd", rc.data_noise_sd);
  rc.data_seed = static_cast<std::uint64_t>(
      cfg.get_int("data.seed", static_cast<long long>(rc.data_seed)));

  rc.n_devices = static_cast<int>(cfg.get_int("devices.count", rc.n_devices));
  rc.tau_server = cfg.get_num("devices.tau_server", rc.tau_server);
  if (cfg.has("devices.tau_workers"))
    rc.tau_workers_explicit = cfg.get_num_list("devices.tau_workers");
  rc.tau_worker_lo = cfg.get_num("devices.tau_worker_lo", rc.tau_worker_lo);
  rc.tau_worker_hi = cfg.get_num("devices.tau_worker_hi", rc.tau_worker_hi);

  rc.l_min = static_cast<int>(cfg.get_int("sweep.l_min", rc.l_min));
  rc.l_max = static_cast<int>(cfg.get_int("sweep.l_max", rc.l_max));
  rc.tau_comm_plan = cfg.get_num("sweep.tau_comm", rc.tau_comm_plan);

  rc.lambda = cfg.get_num("problem.lambda", rc.lambda);
  rc.eps = cfg.get_num("problem.eps", rc.eps);
  rc.gamma = cfg.get_num("problem.gamma", rc.gamma);
  const std::string c1s = cfg.get_str("problem.c1", "calibrate");
  if (c1s == "calibrate") {
    rc.calibrate_constants = true;
  } else {
    rc.calibrate_constants = false;  // an explicit c1 pins the constants
    rc.c1 = cfg.get_num("problem.c1", rc.c1);
  }
  rc.c2 = cfg.get_num("problem.c2", rc.c2);

  rc.scales.theta = cfg.get_num("solver.theta_scale", rc.scales.theta);
  rc.scales.eta = cfg.get_num("solver.eta_scale", rc.scales.eta);
  rc.scales.momentum = cfg.get_num("solver.momentum_scale", rc.scales.momentum);
  const std::string inner = cfg.get_str("solver.inner", "exact");
  if (inner == "exact")
    rc.inner.kind = InnerSolver::Kind::exact;
  else if (inner == "ogmg")
    rc.inner.kind = InnerSolver::Kind::ogmg;
  else
    throw ConfigError("solver.inner: expected 'exact' or 'ogmg'");
  rc.inner.ogmg_iters =
      static_cast<int>(cfg.get_int("solver.ogmg_iters", rc.inner.ogmg_iters));
  rc.inner.exact_work_units =
      cfg.get_num("solver.exact_work_units", rc.inner.exact_work_units);
  rc.max_outer = cfg.get_int("solver.max_outer", rc.max_outer);

  if (cfg.has("noise.levels")) rc.noise_levels = cfg.get_num_list("noise.levels");
  rc.noise_draws = cfg.get_int("noise.draws", rc.noise_draws);
  rc.bootstrap_reps =
      static_cast<int>(cfg.get_int("noise.bootstrap_reps", rc.bootstrap_reps));

  rc.out_dir = cfg.get_str("run.out", rc.out_dir);
  rc.master_seed = static_cast<std::uint64_t>(
      cfg.get_int("run.seed", static_cast<long long>(rc.master_seed)));

  rc.validate();
  return rc;
}

void RunConfig::validate() const {
  if (source == Source::libsvm && data_path.empty())
    throw ConfigError("data.path: required when data.source = libsvm");
  if (n_samples < 1) throw ConfigError("data.n: must be >= 1");
  if (dim < 1) throw ConfigError("data.dim: must be >= 1");
  if (!(data_noise_sd >= 0.0)) throw ConfigError("data.noise_sd: must be >= 0");
  if (n_devices < 1) throw ConfigError("devices.count: must be >= 1");
  if (n_samples < n_devices)
    throw ConfigError("data.n: must be >= devices.count");
  if (!(tau_server > 0.0)) throw ConfigError("devices.tau_server: must be > 0");
  if (!tau_workers_explicit.empty()) {
    if (static_cast<int>(tau_workers_explicit.size()) != n_devices - 1)
      throw ConfigError("devices.tau_workers: need devices.count - 1 entries");
    for (double t : tau_workers_explicit)
      if (!(t > 0.0)) throw ConfigError("devices.tau_workers: must be > 0");
  } else if (!(0.0 < tau_worker_lo && tau_worker_lo <= tau_worker_hi)) {
    throw ConfigError("devices.tau_worker_lo/hi: need 0 < lo <= hi");
  }
  if (l_min > l_max) throw ConfigError("sweep.l_min: must be <= sweep.l_max");
  if (!(tau_comm_plan >= 0.0)) throw ConfigError("sweep.tau_comm: must be >= 0");
  if (!(lambda > 0.0)) throw ConfigError("problem.lambda: must be > 0");
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("problem.eps: must be in (0,1)");
  if (gamma != 0.5 && gamma != 1.0)
    throw ConfigError("problem.gamma: must be 0.5 or 1");
  if (!calibrate_constants && (!(c1 > 0.0) || !(c2 > 0.0)))
    throw ConfigError("problem.c1/c2: must be > 0");
  for (double p : noise_levels)
    if (!(p >= 0.0 && p <= 1.0))
      throw ConfigError("noise.levels: entries must be in [0,1]");
  if (noise_draws < 2) throw ConfigError("noise.draws: must be >= 2");
  if (bootstrap_reps < 10) throw ConfigError("noise.bootstrap_reps: must be >= 10");
  if (max_outer < 1) throw ConfigError("solver.max_outer: must be >= 1");
}

Dataset load_dataset(const RunConfig& rc) {
  if (rc.source == RunConfig::Source::libsvm) {
    Dataset d = parse_libsvm_file(rc.data_path);
    d.validate();
    return d;
  }
  return gen_synthetic(rc.n_samples, rc.dim, rc.data_noise_sd, rc.data_seed);
}

std::vector<double> worker_taus(const RunConfig& rc) {
  if (!rc.tau_workers_explicit.empty()) return rc.tau_workers_explicit;
  std::mt19937_64 rng(mix_seed(rc.master_seed, 0x7AU));
  std::uniform_real_distribution<double> d(rc.tau_worker_lo, rc.tau_worker_hi);
  std::vector<double> taus(static_cast<std::size_t>(rc.n_devices - 1));
  for (double& t : taus) t = d(rng);
  return taus;
}

TimingModel make_timing(const RunConfig& rc, double tau_comm) {
  TimingModel tm;
  tm.tau_local.push_back(rc.tau_server);
  const std::vector<double> w = worker_taus(rc);
  tm.tau_local.insert(tm.tau_local.end(), w.begin(), w.end());
  tm.tau_comm = tau_comm;
  return tm;
}

ProblemConstants problem_constants(const RunConfig& rc, const RidgeProblem& p) {
  const SpectralConstants sc = spectral_constants(p);
  ProblemConstants pc;
  pc.L = sc.L;
  pc.mu = sc.mu;
  pc.eps = rc.eps;
  pc.gamma = rc.gamma;
  pc.c1 = rc.c1;
  pc.c2 = rc.c2;
  pc.validate();
  return pc;
}

namespace {

struct RunCounts {
  long long outer = 0;
  double inner = 0.0;
  bool converged = false;
  std::string error;
};

RunCounts solve_counts(const RidgeProblem& prob, const Allocation& alloc,
                       const ProblemConstants& pc, const RunConfig& rc) {
  RunCounts out;
  try {
    // step sizes follow the measured similarity of the realized shards; the
    // structural delta-law is a planning device and can understate the real
    // Hessian gap enough to destabilize the steps
    const ShardSet sh = shard(prob.data, alloc, rc.master_seed);
    const CompositeObjective obj(prob, sh.shards.front());
    const double gap = std::max(obj.similarity_gap(), pc.mu);
    AlgParams params = default_params(pc, gap, rc.scales);
    params.max_outer = rc.max_outer;
    TimingModel unit;
    unit.tau_local.assign(static_cast<std::size_t>(alloc.n()), 1.0);
    unit.tau_comm = 0.0;
    SimOptions opts;
    opts.inner = rc.inner;
    opts.shard_seed = rc.master_seed;
    SimResult sr = simulate_run(prob, alloc, unit, pc, params, opts);
    out.outer = sr.outer_iters;
    out.inner = sr.inner_iters;
    out.converged = sr.converged;
    if (!sr.converged) out.error = "no convergence within max_outer";
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

// Solve each distinct allocation once (counts do not depend on timings);
// distinct allocations run concurrently, each individual solve is sequential.
std::map<std::vector<long long>, RunCounts> solve_distinct(
    const RidgeProblem& prob, const std::vector<Allocation>& allocs,
    const ProblemConstants& pc, const RunConfig& rc) {
  std::vector<Allocation> distinct;
  std::map<std::vector<long long>, std::size_t> index;
  for (const Allocation& a : allocs) {
    if (index.emplace(a.b, distinct.size()).second) distinct.push_back(a);
  }
  std::vector<RunCounts> counts(distinct.size());
  const long long m = static_cast<long long>(distinct.size());
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < m; ++i)
    counts[static_cast<std::size_t>(i)] =
        solve_counts(prob, distinct[static_cast<std::size_t>(i)], pc, rc);
  std::map<std::vector<long long>, RunCounts> out;
  for (const auto& [key, idx] : index) out[key] = counts[idx];
  return out;
}

struct Setup {
  Dataset data;
  RidgeProblem prob;
  ProblemConstants pc;
};

Setup make_setup(const RunConfig& rc) {
  Setup s;
  s.data = load_dataset(rc);
  s.prob = RidgeProblem{s.data, rc.lambda};
  s.prob.validate();
  s.pc = problem_constants(rc, s.prob);
  if (rc.calibrate_constants) {
    const CalibrationReport cal = run_calibrate(rc);
    s.pc.c1 = cal.cal.c1;
    s.pc.c2 = cal.cal.c2;
    s.pc.validate();
  }
  return s;
}

// planner cost model at a concrete allocation: alpha * b1^{-gamma/2} rounds
// of (slowest pass + exchange) plus beta * b1 server-side inner work. Used
// for the plan report so planned-vs-uniform is compared under the metric the
// planner minimizes.
double model_time(const PlannerInput& in, const Allocation& alloc) {
  const double b1 = static_cast<double>(alloc.b1());
  double max_pass = 0.0;
  for (std::size_t i = 0; i < alloc.b.size(); ++i)
    max_pass = std::max(
        max_pass, in.timing.tau_local[i] * static_cast<double>(alloc.b[i]));
  return in.rates.alpha * std::pow(b1, -in.consts.gamma / 2.0) *
             (max_pass + in.timing.tau_comm) +
         in.timing.tau_local.front() * in.rates.beta * b1;
}

}  // namespace

PlanReport run_plan(const RunConfig& rc) {
  const Setup s = make_setup(rc);
  const long long N = s.data.n();
  const TimingModel timing = make_timing(rc, rc.tau_comm_plan);
  PlanReport rep;
  rep.input = PlannerInput::make(N, timing, s.pc);
  rep.planned = plan(rep.input);
  rep.uniform = uniform_allocation(N, rc.n_devices);
  rep.t_planned = model_time(rep.input, rep.planned.allocation);
  rep.t_uniform = model_time(rep.input, rep.uniform);
  rep.predicted_speedup = rep.t_uniform / rep.t_planned;
  return rep;
}

std::string PlanReport::text() const {
  std::ostringstream out;
  out << "devices: " << input.n() << ", samples: " << input.N
      << ", tau_comm: " << csv_num(input.timing.tau_comm) << "\n";
  out << "method: " << to_string(planned.method)
      << ", b1_continuous: " << csv_num(planned.b1_continuous)
      << ", F: " << csv_num(planned.objective_value) << "\n";
  out << "allocation:";
  for (long long v : planned.allocation.b) out << " " << v;
  out << "\nuniform:   ";
  for (long long v : uniform.b) out << " " << v;
  out << "\npredicted T(planned): " << csv_num(t_planned)
      << ", T(uniform): " << csv_num(t_uniform)
      << ", speedup: " << csv_num(predicted_speedup) << "\n";
  return out.str();
}

CsvTable PlanReport::to_csv() const {
  CsvTable t({"device", "tau_local", "b_planned", "b_uniform"});
  for (int i = 0; i < input.n(); ++i)
    t.add_row({csv_int(i + 1),
               csv_num(input.timing.tau_local[static_cast<std::size_t>(i)]),
               csv_int(planned.allocation.b[static_cast<std::size_t>(i)]),
               csv_int(uniform.b[static_cast<std::size_t>(i)])});
  return t;
}

SweepOutput run_sweep(const RunConfig& rc) {
  const Setup s = make_setup(rc);
  const long long N = s.data.n();
  SweepOutput out;
  out.base_timing = make_timing(rc, 0.0);
  out.consts = s.pc;

  const Allocation uniform = uniform_allocation(N, rc.n_devices);
  const int n_rows = rc.l_max - rc.l_min + 1;
  out.rows.assign(static_cast<std::size_t>(n_rows), SweepRow{});

  // phase 1: plan every point (cheap, deterministic)
  std::vector<Allocation> to_solve;
  std::vector<Allocation> planned_allocs(static_cast<std::size_t>(n_rows),
                                         uniform);
  to_solve.push_back(uniform);
  for (int i = 0; i < n_rows; ++i) {
    SweepRow& row = out.rows[static_cast<std::size_t>(i)];
    row.l = rc.l_min + i;
    row.tau_comm = pow10i(row.l) * rc.tau_server;
    row.b1_newton = kNaN;
    row.b1_cardano = kNaN;
    row.b1_small_comm = kNaN;
    row.b1_large_comm = kNaN;
    row.b1_uniform = uniform.b1();
    try {
      const TimingModel timing = make_timing(rc, row.tau_comm);
      const PlannerInput in = PlannerInput::make(N, timing, s.pc);
      const PlanResult planned = plan(in);
      row.method = to_string(planned.method);
      row.b1_planned = planned.allocation.b1();
      row.b1_newton = plan(in, RootMethod::newton).b1_continuous;
      if (s.pc.gamma == 1.0)
        row.b1_cardano = plan(in, RootMethod::cardano).b1_continuous;
      if (s.pc.gamma == 0.5) {
        const ClosedFormResult small = closed_form_small_comm(in);
        if (small.regime_ok) row.b1_small_comm = small.result.b1_continuous;
        try {
          const ClosedFormResult large = closed_form_large_comm(in);
          if (large.regime_ok) row.b1_large_comm = large.result.b1_continuous;
        } catch (const std::invalid_argument&) {
          // heterogeneous workers: closed form not applicable
        }
      }
      planned_allocs[static_cast<std::size_t>(i)] = planned.allocation;
      to_solve.push_back(planned.allocation);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  }

  // phase 2: one solver run per distinct allocation
  const auto counts = solve_distinct(s.prob, to_solve, s.pc, rc);

  // phase 3: clock accounting per row
  const RunCounts& cu = counts.at(uniform.b);
  for (int i = 0; i < n_rows; ++i) {
    SweepRow& row = out.rows[static_cast<std::size_t>(i)];
    if (!row.error.empty()) continue;
    const TimingModel timing = make_timing(rc, row.tau_comm);
    const Allocation& planned = planned_allocs[static_cast<std::size_t>(i)];
    const RunCounts& cp = counts.at(planned.b);
    if (!cp.error.empty()) {
      row.error = "planned: " + cp.error;
      continue;
    }
    if (!cu.error.empty()) {
      row.error = "uniform: " + cu.error;
      continue;
    }
    row.outer_planned = cp.outer;
    row.inner_planned = cp.inner;
    row.outer_uniform = cu.outer;
    row.inner_uniform = cu.inner;
    row.time_planned = sim_clock(planned, timing, cp.outer, cp.inner);
    row.time_uniform = sim_clock(uniform, timing, cu.outer, cu.inner);
    row.speedup = row.time_uniform / row.time_planned;
  }
  return out;
}

CsvTable SweepOutput::to_csv() const {
  CsvTable t({"l", "tau_comm", "b1_newton", "b1_cardano", "b1_small_comm",
              "b1_large_comm", "b1_planned", "b1_uniform", "method",
              "time_planned", "time_uniform", "speedup", "outer_planned",
              "inner_planned", "outer_uniform", "inner_uniform", "error"});
  for (const SweepRow& r : rows) {
    t.add_row({csv_int(r.l), csv_num(r.tau_comm), cell_opt(r.b1_newton),
               cell_opt(r.b1_cardano), cell_opt(r.b1_small_comm),
               cell_opt(r.b1_large_comm), csv_int(r.b1_planned),
               csv_int(r.b1_uniform), r.method, csv_num(r.time_planned),
               csv_num(r.time_uniform), csv_num(r.speedup),
               csv_int(r.outer_planned), csv_num(r.inner_planned),
               csv_int(r.outer_uniform), csv_num(r.inner_uniform), r.error});
  }
  return t;
}

NoiseOutput run_noise(const RunConfig& rc) {
  const Setup s = make_setup(rc);
  const long long N = s.data.n();
  NoiseOutput out;
  out.base_timing = make_timing(rc, 0.0);
  out.consts = s.pc;
  const DerivedRates rates = derived_rates(s.pc);
  const double tau_max =
      *std::max_element(out.base_timing.tau_local.begin(),
                        out.base_timing.tau_local.end());

  // big-communication points only
  std::vector<int> ls;
  for (int l = rc.l_min; l <= rc.l_max; ++l) {
    const double tc = pow10i(l) * rc.tau_server;
    if (tc > static_cast<double>(N) * tau_max) ls.push_back(l);
  }

  const Allocation uniform = uniform_allocation(N, rc.n_devices);
  std::vector<Allocation> planned(ls.size(), uniform);
  std::vector<std::string> plan_errors(ls.size());
  std::vector<Allocation> to_solve;
  to_solve.push_back(uniform);
  for (std::size_t i = 0; i < ls.size(); ++i) {
    try {
      const TimingModel timing = make_timing(rc, pow10i(ls[i]) * rc.tau_server);
      planned[i] = plan(PlannerInput::make(N, timing, s.pc)).allocation;
      to_solve.push_back(planned[i]);
    } catch (const std::exception& e) {
      plan_errors[i] = e.what();
    }
  }
  const auto counts = solve_distinct(s.prob, to_solve, s.pc, rc);
  const RunCounts& cu = counts.at(uniform.b);

  const double coeff = std::pow(rates.alpha, 0.8) * std::pow(rates.beta, 0.2) *
                       (std::pow(4.0, 0.2) + std::pow(4.0, -0.8));

  for (std::size_t i = 0; i < ls.size(); ++i) {
    const int l = ls[i];
    const double tc = pow10i(l) * rc.tau_server;
    const TimingModel timing = make_timing(rc, tc);
    for (std::size_t pi = 0; pi < rc.noise_levels.size(); ++pi) {
      const double p = rc.noise_levels[pi];
      NoiseRow row;
      row.l = l;
      row.tau_comm = tc;
      row.p = p;
      if (!plan_errors[i].empty()) {
        row.error = plan_errors[i];
        out.rows.push_back(row);
        continue;
      }
      const RunCounts& cp = counts.at(planned[i].b);
      if (!cp.error.empty() || !cu.error.empty()) {
        row.error = !cp.error.empty() ? "planned: " + cp.error
                                      : "uniform: " + cu.error;
        out.rows.push_back(row);
        continue;
      }
      const double t_p0 = sim_clock(planned[i], timing, cp.outer, cp.inner);
      const double t_u0 = sim_clock(uniform, timing, cu.outer, cu.inner);
      row.accel_base = t_u0 / t_p0;

      if (p == 0.0) {
        // degenerate noise: every draw reproduces the nominal timing, so all
        // sample statistics are their point values
        row.ratio_mean = 1.0;
        row.ratio_ci = 0.0;
        row.emp_var = 0.0;
        row.theo_var = 0.0;
        row.var_ci_lo = 0.0;
        row.var_ci_hi = 0.0;
        row.within_ci = true;
        out.rows.push_back(row);
        continue;
      }

      NoiseModel noise;
      noise.rel_amplitude = p;
      noise.applies_to = NoiseModel::Applies::both;
      noise.redraw = NoiseModel::Redraw::per_run;
      noise.seed = mix_seed(rc.master_seed,
                            (static_cast<std::uint64_t>(l - rc.l_min) << 8) |
                                static_cast<std::uint64_t>(pi));

      // paired draws: the same timing draw feeds both allocations, and the
      // same tau_comm / tau_1 feed the F-law sample
      const long long n = rc.noise_draws;
      std::vector<double> ratio(static_cast<std::size_t>(n));
      std::vector<double> flaw(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
      for (long long d = 0; d < n; ++d) {
        const TimingModel tm =
            sample_timing(timing, noise, static_cast<std::uint64_t>(d));
        const double tp = sim_clock(planned[i], tm, cp.outer, cp.inner);
        const double tu = sim_clock(uniform, tm, cu.outer, cu.inner);
        ratio[static_cast<std::size_t>(d)] = (tu / tp) / row.accel_base;
        flaw[static_cast<std::size_t>(d)] =
            coeff * std::pow(tm.tau_comm, 0.8) *
            std::pow(tm.tau_local.front(), 0.2);
      }
      const MomentEstimate rm = moments_of(ratio);
      row.ratio_mean = rm.mean;
      row.ratio_ci = rm.ci_halfwidth;
      const MomentEstimate fm = moments_of(flaw);
      row.emp_var = fm.variance;
      const auto ci = bootstrap_variance_ci(flaw, rc.bootstrap_reps,
                                            mix_seed(noise.seed, 0xB007U));
      row.var_ci_lo = ci.first;
      row.var_ci_hi = ci.second;
      row.theo_var = theoretical_var_large_comm(
          rates, uniform_power_stats(tc * (1.0 - p), tc * (1.0 + p), 0.8),
          uniform_power_stats(rc.tau_server * (1.0 - p),
                              rc.tau_server * (1.0 + p), 0.2));
      row.within_ci = row.theo_var >= row.var_ci_lo &&
                      row.theo_var <= row.var_ci_hi;
      out.rows.push_back(row);
    }
  }
  return out;
}

CsvTable NoiseOutput::to_csv() const {
  CsvTable t({"l", "tau_comm", "p", "accel_base", "ratio_mean", "ratio_ci",
              "emp_var", "theo_var", "var_ci_lo", "var_ci_hi", "within_ci",
              "error"});
  for (const NoiseRow& r : rows) {
    t.add_row({csv_int(r.l), csv_num(r.tau_comm), csv_num(r.p),
               csv_num(r.accel_base), csv_num(r.ratio_mean),
               csv_num(r.ratio_ci), csv_num(r.emp_var), csv_num(r.theo_var),
               csv_num(r.var_ci_lo), csv_num(r.var_ci_hi),
               r.within_ci ? "true" : "false", r.error});
  }
  return t;
}

CalibrationReport run_calibrate(const RunConfig& rc, long long b1_probe) {
  Dataset data = load_dataset(rc);
  RidgeProblem prob{data, rc.lambda};
  prob.validate();
  RunConfig base = rc;
  base.calibrate_constants = false;  // probe runs with the raw constants
  ProblemConstants pc = problem_constants(base, prob);

  const long long N = data.n();
  Allocation alloc = uniform_allocation(N, rc.n_devices);
  if (b1_probe > 0) {
    if (b1_probe > N) throw ConfigError("calibrate: b1 probe exceeds N");
    alloc.b.assign(static_cast<std::size_t>(rc.n_devices), 0);
    alloc.b[0] = b1_probe;
    const long long rest = N - b1_probe;
    const int workers = rc.n_devices - 1;
    for (int i = 0; i < workers; ++i)
      alloc.b[static_cast<std::size_t>(i) + 1] =
          rest / workers + (i < rest % workers ? 1 : 0);
    alloc.validate();
  }

  const RunCounts counts = solve_counts(prob, alloc, pc, base);
  if (!counts.error.empty())
    throw std::runtime_error("calibrate: probe failed: " + counts.error);

  CalibrationReport rep;
  rep.b1_probe = alloc.b1();
  rep.observed.two_k_outer = std::max<long long>(1, 2 * counts.outer);
  rep.observed.k_inner =
      std::max<long long>(1, static_cast<long long>(std::llround(counts.inner)));
  rep.converged = counts.converged;
  rep.cal = calibrate(pc, static_cast<double>(rep.b1_probe), rep.observed);
  return rep;
}

Config CalibrationReport::overlay() const {
  Config cfg;
  cfg.set("problem.c1", csv_num(cal.c1));
  cfg.set("problem.c2", csv_num(cal.c2));
  return cfg;
}

}  // namespace dsplit
