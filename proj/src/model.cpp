#include "dsplit/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dsplit {

void TimingModel::validate() const {
  if (tau_local.empty()) throw std::invalid_argument("timing: no devices");
  for (std::size_t i = 0; i < tau_local.size(); ++i) {
    if (!(tau_local[i] > 0.0) || !std::isfinite(tau_local[i]))
      throw std::invalid_argument("timing: tau_local[" + std::to_string(i) +
                                  "] must be positive");
  }
  if (!(tau_comm >= 0.0) || !std::isfinite(tau_comm))
    throw std::invalid_argument("timing: tau_comm must be nonnegative");
}

double ProblemConstants::log_inv_eps() const { return std::log(1.0 / eps); }

void ProblemConstants::validate() const {
  if (!(mu > 0.0)) throw std::invalid_argument("constants: mu must be positive");
  if (!(L >= mu)) throw std::invalid_argument("constants: L must be >= mu");
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("constants: eps must be in (0,1)");
  if (gamma != 0.5 && gamma != 1.0)
    throw std::invalid_argument("constants: gamma must be 0.5 or 1.0");
  if (!(c1 > 0.0) || !(c2 > 0.0))
    throw std::invalid_argument("constants: c1, c2 must be positive");
}

DeltaResult delta_of(const ProblemConstants& pc, double b1) {
  pc.validate();
  if (!(b1 >= 1.0)) throw std::domain_error("delta_of: b1 must be >= 1");
  const double raw = pc.L / std::pow(b1, pc.gamma);
  const double clamped = std::clamp(raw, pc.mu, pc.L);
  return {clamped, clamped != raw};
}

DerivedRates derived_rates(const ProblemConstants& pc) {
  pc.validate();
  const double root_kappa = std::sqrt(pc.L / pc.mu);
  return {pc.c1 * root_kappa * pc.log_inv_eps(),
          pc.c2 * root_kappa * pc.log_inv_eps()};
}

IterationEstimates rate_estimates(const ProblemConstants& pc, double b1) {
  const double delta = delta_of(pc, b1).delta;
  const double log_term = pc.log_inv_eps();
  const double outer = pc.c1 * std::max(1.0, std::sqrt(delta / pc.mu)) * log_term;
  // delta is clamped into [mu, L], so sqrt(L/mu) dominates the max below.
  const double inner =
      pc.c2 *
      std::max({1.0, std::sqrt(pc.L / delta), std::sqrt(delta / pc.mu),
                std::sqrt(pc.L / pc.mu)}) *
      log_term;
  IterationEstimates est;
  est.two_k_outer = std::max<long long>(1, static_cast<long long>(std::ceil(outer)));
  est.k_inner = std::max<long long>(1, static_cast<long long>(std::ceil(inner)));
  return est;
}

long long Allocation::total() const {
  long long t = 0;
  for (long long v : b) t += v;
  return t;
}

void Allocation::validate() const {
  if (b.empty()) throw std::invalid_argument("allocation: no devices");
  if (b.front() < 1)
    throw std::invalid_argument("allocation: server share must be >= 1");
  for (long long v : b)
    if (v < 0) throw std::invalid_argument("allocation: negative share");
}

Allocation uniform_allocation(long long N, int n) {
  if (n < 1) throw std::invalid_argument("uniform_allocation: n must be >= 1");
  if (N < n) throw std::invalid_argument("uniform_allocation: N must be >= n");
  Allocation a;
  a.b.assign(static_cast<std::size_t>(n), N / n);
  const long long rem = N % n;
  for (long long i = 0; i < rem; ++i) a.b[static_cast<std::size_t>(i)] += 1;
  return a;
}

double total_time(const Allocation& alloc, const TimingModel& tm,
                  const IterationEstimates& est) {
  alloc.validate();
  // accept degenerate zero-cost timings here (pure accounting); the strict
  // positivity of TimingModel::validate only matters where we divide by tau
  for (double t : tm.tau_local)
    if (!(t >= 0.0) || !std::isfinite(t))
      throw std::invalid_argument("total_time: tau_local must be >= 0");
  if (!(tm.tau_comm >= 0.0) || !std::isfinite(tm.tau_comm))
    throw std::invalid_argument("total_time: tau_comm must be >= 0");
  if (alloc.n() != tm.n())
    throw std::invalid_argument("total_time: allocation/timing size mismatch");
  if (est.two_k_outer < 1 || est.k_inner < 1)
    throw std::invalid_argument("total_time: iteration counts must be >= 1");
  double max_pass = 0.0;
  for (int i = 0; i < alloc.n(); ++i)
    max_pass = std::max(max_pass, tm.tau_local[static_cast<std::size_t>(i)] *
                                      static_cast<double>(alloc.b[static_cast<std::size_t>(i)]));
  const double server_pass =
      tm.tau_local.front() * static_cast<double>(alloc.b1());
  return static_cast<double>(est.two_k_outer) * (max_pass + tm.tau_comm) +
         server_pass * static_cast<double>(est.k_inner);
}

Calibration calibrate(const ProblemConstants& pc, double b1_probe,
                      const IterationEstimates& observed) {
  if (observed.two_k_outer < 1 || observed.k_inner < 1)
    throw std::invalid_argument("calibrate: observed counts must be >= 1");
  const double delta = delta_of(pc, b1_probe).delta;
  const double log_term = pc.log_inv_eps();
  if (!(log_term > 0.0))
    throw std::invalid_argument("calibrate: eps must be < 1");
  Calibration c;
  c.c1 = static_cast<double>(observed.two_k_outer) /
         (std::max(1.0, std::sqrt(delta / pc.mu)) * log_term);
  c.c2 = static_cast<double>(observed.k_inner) /
         (std::sqrt(pc.L / pc.mu) * log_term);
  return c;
}

}  // namespace dsplit
