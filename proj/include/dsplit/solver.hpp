#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <vector>

#include "dsplit/model.hpp"
#include "dsplit/ridge.hpp"

namespace dsplit {

// Step sizes of the outer scheme. With kappa = delta/mu:
//   momentum in (0,1) ~ sqrt(1/kappa), eta ~ 1/sqrt(mu*delta),
//   theta ~ 1/delta, alpha_reg = mu.
struct AlgParams {
  double momentum = 0.5;
  double eta = 1.0;
  double theta = 1.0;
  double alpha_reg = 0.0;
  long long max_outer = 200000;

  void validate() const;
};

// Safety factors applied on top of the 1/delta and 1/sqrt(mu*delta) scalings.
// The defaults keep the subproblem step conservative enough for the sharded
// quadratics used here; configs may override them.
struct ParamScales {
  double theta = 0.25;
  double eta = 0.5;
  double momentum = 0.5;
};

AlgParams default_params(const ProblemConstants& pc, double delta,
                         const ParamScales& scales = {});

// Relative/absolute stopping rule on the full gradient norm:
// ||grad f(x_f)|| <= max(rel_tol * ||grad f(x0)||, abs_tol).
struct StopRule {
  double rel_tol = 1e-6;
  double abs_tol = 0.0;
};

// Ridge objective split into the server-held data-fit part f1 and the rest.
// f(w)  = ||X w - y||^2 / (2N) + lambda/2 ||w||^2   (full data)
// f1(w) = ||X1 w - y1||^2 / (2 b1)                  (server shard, no ridge)
// rest_grad = grad f - grad f1; this is what the workers plus the regularizer
// contribute at the linearization point.
class CompositeObjective {
 public:
  CompositeObjective(const RidgeProblem& full, const Dataset& server_shard);

  int dim() const { return dim_; }
  double lambda() const { return lambda_; }
  Eigen::VectorXd full_grad(const Eigen::VectorXd& w) const;
  double full_value(const Eigen::VectorXd& w) const;
  Eigen::VectorXd f1_grad(const Eigen::VectorXd& w) const;
  Eigen::VectorXd rest_grad(const Eigen::VectorXd& w) const;

  const Eigen::MatrixXd& server_gram() const { return g1_; }
  const Eigen::VectorXd& server_xty() const { return h1_; }
  double f1_smoothness() const;  // lmax of the server Gram, cached

  // Measured Hessian similarity of the realized split:
  // ||grad^2 f - grad^2 f1|| = largest |eigenvalue| of G + lambda*I - G1.
  // This is the delta the outer scheme's step sizes actually depend on;
  // the structural L/b1^gamma law only models it. Cached.
  double similarity_gap() const;

  // Exact minimizer of
  //   <grad_rest, x - x_g> + ||x - x_g||^2 / (2 theta) + f1(x),
  // i.e. (I/theta + G1) x = x_g/theta + X1'y1/b1 - grad_rest. The
  // factorization is cached across calls with the same theta. A singular
  // system (theta = inf on rank-deficient data) is an error.
  Eigen::VectorXd exact_prox(const Eigen::VectorXd& x_g,
                             const Eigen::VectorXd& grad_rest,
                             double theta) const;

 private:
  int dim_;
  double lambda_;
  double y_sq_half_;  // value offset: ||y||^2 / (2N)
  Eigen::MatrixXd g_full_, g1_;
  Eigen::VectorXd h_full_, h1_;
  mutable double f1_lmax_ = -1.0;
  mutable double sim_gap_ = -1.0;
  mutable double cached_theta_ = -1.0;
  mutable Eigen::LDLT<Eigen::MatrixXd> prox_ldlt_;
};

Eigen::VectorXd subproblem_exact_ridge(const CompositeObjective& obj,
                                       const Eigen::VectorXd& x_g,
                                       const Eigen::VectorXd& grad_rest,
                                       double theta);

// Fixed-iteration OGM-G pass on the same subproblem model, started at x_g.
Eigen::VectorXd subproblem_ogmg(const CompositeObjective& obj,
                                const Eigen::VectorXd& x_g,
                                const Eigen::VectorXd& grad_rest, double theta,
                                int iters);

// OGM-G for an L-smooth convex gradient field: n_iters gradient calls, tuned
// to drive the final gradient norm down at the 1/n^2 rate. Returns the last
// gradient-step point of the schedule.
Eigen::VectorXd ogmg_minimize(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
    double smoothness, Eigen::VectorXd x0, int n_iters);

struct InnerSolver {
  enum class Kind { exact, ogmg };
  Kind kind = Kind::exact;
  int ogmg_iters = 200;
  // simulated server work units charged per exact solve (each unit costs one
  // tau_1 * b_1 pass on the clock)
  double exact_work_units = 1.0;
};

struct IterRecord {
  double grad_norm;    // ||grad f(x_f)|| after the update
  double inner_units;  // inner iterations (or work units) spent this step
};

struct SolveResult {
  Eigen::VectorXd x;
  long long outer_iters = 0;  // K
  double inner_total = 0.0;
  double final_grad_norm = 0.0;
  bool converged = false;
  std::vector<IterRecord> trace;
};

struct DivergenceError : std::runtime_error {
  long long iteration;
  explicit DivergenceError(long long it);
};

// One outer loop:
//   x_g = momentum * x + (1 - momentum) * x_f
//   x_f <- approx argmin of the theta-model anchored at x_g
//   x   <- x + eta*alpha_reg*(x_f - x) - eta * grad f(x_f)
// Stops on the rule or max_outer; unbounded iterates raise DivergenceError.
SolveResult accel_extragradient(const CompositeObjective& obj,
                                const AlgParams& params,
                                const InnerSolver& inner,
                                Eigen::VectorXd x0, const StopRule& stop);

}  // namespace dsplit
