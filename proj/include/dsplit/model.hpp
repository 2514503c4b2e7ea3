#pragma once

#include <cstdint>
#include <vector>

namespace dsplit {

// Per-device timing. tau_local[i] is the time one device needs to process one
// sample in one local pass; index 0 is the server, indices 1..n-1 are workers.
// tau_comm is the cost of one server<->workers exchange.
struct TimingModel {
  std::vector<double> tau_local;
  double tau_comm = 0.0;

  int n() const { return static_cast<int>(tau_local.size()); }
  // throws std::invalid_argument on non-positive tau_local or negative tau_comm
  void validate() const;
};

// Constants of the iteration model. gamma selects the similarity law
// delta(b1) = L / b1^gamma and must be 0.5 or 1.0.
struct ProblemConstants {
  double L = 1.0;
  double mu = 1.0;
  double eps = 1e-6;  // target accuracy, in (0,1)
  double gamma = 0.5;
  double c1 = 1.0;  // calibration constant of the outer iteration count
  double c2 = 1.0;  // calibration constant of the inner iteration count

  double log_inv_eps() const;  // natural log
  void validate() const;
};

struct DeltaResult {
  double delta;
  bool clamped;  // true when L / b1^gamma fell outside [mu, L]
};

// Similarity bound for a server share of b1 samples, clamped into [mu, L].
// b1 < 1 is a domain error.
DeltaResult delta_of(const ProblemConstants& pc, double b1);

// alpha = c1 * sqrt(L/mu) * log(1/eps), beta likewise with c2. These are the
// coefficients the planner objective is built from.
struct DerivedRates {
  double alpha = 0.0;
  double beta = 0.0;
};

DerivedRates derived_rates(const ProblemConstants& pc);

// Iteration counts used by the time accounting. two_k_outer is twice the
// outer iteration count K (the unit the outer estimate is stated in: each
// outer step costs two local passes and two exchanges); k_inner is the total
// number of server-side inner iterations over the whole run.
struct IterationEstimates {
  long long two_k_outer = 1;
  long long k_inner = 1;
};

// two_k_outer = ceil(c1 * max{1, sqrt(delta/mu)} * log(1/eps)),
// k_inner     = ceil(c2 * max{1, sqrt(L/delta), sqrt(delta/mu), sqrt(L/mu)}
//                       * log(1/eps)),
// with delta = delta_of(pc, b1). Both are at least 1.
IterationEstimates rate_estimates(const ProblemConstants& pc, double b1);

// Sample counts per device, b[0] is the server share. Workers may hold zero
// samples; the server holds at least one.
struct Allocation {
  std::vector<long long> b;

  int n() const { return static_cast<int>(b.size()); }
  long long total() const;
  long long b1() const { return b.front(); }
  void validate() const;
};

// Even split of N over n devices; the first N mod n devices get one extra.
Allocation uniform_allocation(long long N, int n);

// T = two_k_outer * (max_i tau_i*b_i + tau_comm) + tau_1*b_1 * k_inner.
double total_time(const Allocation& alloc, const TimingModel& tm,
                  const IterationEstimates& est);

struct Calibration {
  double c1 = 1.0;
  double c2 = 1.0;
};

// Inverts rate_estimates at one observed run: c1 from the outer count at the
// probe's delta, c2 from the inner count. eps >= 1 is rejected (log(1/eps)
// would not be positive).
Calibration calibrate(const ProblemConstants& pc, double b1_probe,
                      const IterationEstimates& observed);

}  // namespace dsplit
