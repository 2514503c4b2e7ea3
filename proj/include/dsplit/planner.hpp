#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "dsplit/model.hpp"

namespace dsplit {

// Everything the planner needs to choose a server share b1 and worker shares.
struct PlannerInput {
  long long N = 0;
  TimingModel timing;
  ProblemConstants consts;
  DerivedRates rates;

  static PlannerInput make(long long N, TimingModel timing,
                           ProblemConstants consts);
  void validate() const;
  int n() const { return timing.n(); }
  // s = 1 / sum_{i>=2} 1/tau_i, the rate of the equalized worker pool.
  // Requires at least one worker.
  double worker_pool_rate() const;
};

enum class PlanMethod {
  newton,
  cardano,
  small_comm,
  large_comm,
  boundary,
  brute_force,
};

const char* to_string(PlanMethod m);

struct PlanResult {
  Allocation allocation;
  double b1_continuous = 0.0;
  double objective_value = 0.0;  // F at the continuous minimizer
  PlanMethod method = PlanMethod::boundary;
};

// Integer worker shares for n_rest samples, proportional to 1/tau_i in the
// continuous relaxation (equal finish times), rounded by largest remainder and
// then locally repaired so that no single-unit transfer lowers the worker
// makespan. Returns an empty vector for an empty worker list.
std::vector<long long> equalize_workers(long long n_rest,
                                        const std::vector<double>& tau_workers);

// b1 at which the server pass time tau_1*b1 meets the equalized worker pass
// time (N-b1)*s: b1_0 = N*s / (tau_1 + s). Errors when there are no workers.
double breakpoint_b10(const PlannerInput& in);

// F(b1) = (max{tau_1*b1, (N-b1)*s} + tau_comm) * alpha * b1^(-gamma/2)
//         + tau_1 * b1 * beta,
// on (0, N]. With no workers the max degenerates to tau_1*b1.
double objective_F(const PlannerInput& in, double b1);

// Branch derivative of F: the lower branch applies on (0, b1_0] (workers are
// the bottleneck), the upper branch on (b1_0, N]. At b1_0 itself the lower
// branch is reported.
double dF(const PlannerInput& in, double b1);

// Solves a*x^(-1/2) + b*x^(-3/2) + c = 0 for x > 0 via y = sqrt(x), i.e. the
// cubic c*y^3 + a*y^2 + b = 0. Returns y^2 for the unique positive real root;
// nullopt when no positive root exists or the positive root is not unique.
// All-zero coefficients are rejected; coef_0 (= c) must be positive.
std::optional<double> solve_cardano(double coef_m32, double coef_m12,
                                    double coef_0);

// Safeguarded Newton (bisection fallback) for a root of deriv on [lo, hi].
// Requires a sign change between the endpoints, otherwise returns nullopt.
// Stops when |deriv| <= tol; at most 200 iterations. Non-finite values of
// deriv are an error.
std::optional<double> newton_root(const std::function<double(double)>& deriv,
                                  double lo, double hi, double tol);

enum class RootMethod { newton, cardano };

struct BranchRoots {
  std::optional<double> lower;  // stationary point of F on (0, b1_0]
  std::optional<double> upper;  // stationary point of F on (b1_0, N]
};

// Interior stationary points per branch. RootMethod::cardano requires
// gamma == 1; roots outside their half-interval are discarded.
BranchRoots interior_roots(const PlannerInput& in, RootMethod method);

// Full planner: candidates are the interior roots of both branches, b1_0, 1
// and N; the continuous winner is rounded to the best nearby integer and the
// remaining samples are equalized over the workers. The default root method
// is Cardano for gamma == 1 and Newton otherwise.
PlanResult plan(const PlannerInput& in);
PlanResult plan(const PlannerInput& in, RootMethod method);

// Exact integer argmin of F over b1 in [1, N]. Guarded to N <= 100000.
PlanResult brute_force_plan(const PlannerInput& in);

struct ClosedFormResult {
  PlanResult result;
  // Minimal value predicted by the asymptotic two-branch formula (large-comm
  // case only; small-comm reports objective_value again).
  double approx_min_value = 0.0;
  bool regime_ok = false;
  double regime_ratio = 0.0;
};

// Large-communication closed form (gamma = 1/2, uniform worker tau, comm cost
// dominating the passes): b1_min = (tau_comm*alpha / (4*beta*tau_1))^(4/5),
// capped at N. regime_ratio = tau_comm / (N * max tau); the regime holds when
// the ratio exceeds 1. Heterogeneous worker tau is rejected.
ClosedFormResult closed_form_large_comm(const PlannerInput& in);

// Small-communication closed form (gamma = 1/2, tau_comm negligible):
// minimizes alpha*s*(N-b1)*b1^(-1/4) + tau_1*beta*b1 on (0, b1_0].
// regime_ratio = tau_comm / min_i tau_i; the regime holds at ratio <= 1e-3.
ClosedFormResult closed_form_small_comm(const PlannerInput& in);

}  // namespace dsplit
