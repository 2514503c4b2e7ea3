#include "dsplit/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dsplit {

void AlgParams::validate() const {
  if (!(momentum > 0.0) || !(momentum < 1.0))
    throw std::invalid_argument("AlgParams: momentum must lie in (0, 1)");
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw std::invalid_argument("AlgParams: eta must be positive and finite");
  if (!(theta > 0.0))
    throw std::invalid_argument("AlgParams: theta must be positive");
  if (!(alpha_reg >= 0.0) || !std::isfinite(alpha_reg))
    throw std::invalid_argument("AlgParams: alpha_reg must be >= 0");
  if (eta * alpha_reg > 1.0)
    throw std::invalid_argument("AlgParams: eta * alpha_reg must be <= 1");
  if (max_outer < 1)
    throw std::invalid_argument("AlgParams: max_outer must be >= 1");
}

AlgParams default_params(const ProblemConstants& pc, double delta,
                         const ParamScales& scales) {
  pc.validate();
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw std::invalid_argument("default_params: delta must be positive");
  if (!(scales.theta > 0.0) || !(scales.eta > 0.0) || !(scales.momentum > 0.0))
    throw std::invalid_argument("default_params: scales must be positive");
  const double d = std::max(delta, pc.mu);  // similarity is never below mu
  AlgParams p;
  p.theta = scales.theta / d;
  p.alpha_reg = pc.mu;
  p.momentum = std::min(0.999, scales.momentum * std::sqrt(pc.mu / d));
  p.eta = scales.eta / std::sqrt(pc.mu * d);
  p.validate();
  return p;
}

CompositeObjective::CompositeObjective(const RidgeProblem& full,
                                       const Dataset& server_shard) {
  full.validate();
  server_shard.validate();
  if (server_shard.n() == 0)
    throw std::invalid_argument("CompositeObjective: server shard is empty");
  if (server_shard.dim != full.data.dim)
    throw std::invalid_argument(
        "CompositeObjective: shard dimension mismatch");
  dim_ = full.data.dim;
  lambda_ = full.lambda;
  g_full_ = gram_matrix(full.data);
  h_full_ = xty(full.data);
  g1_ = gram_matrix(server_shard);
  h1_ = xty(server_shard);
  double ysq = 0.0;
  for (double y : full.data.labels) ysq += y * y;
  y_sq_half_ = ysq / (2.0 * static_cast<double>(full.data.n()));
}

Eigen::VectorXd CompositeObjective::full_grad(const Eigen::VectorXd& w) const {
  return g_full_ * w - h_full_ + lambda_ * w;
}

double CompositeObjective::full_value(const Eigen::VectorXd& w) const {
  return 0.5 * w.dot(g_full_ * w) - h_full_.dot(w) + y_sq_half_ +
         0.5 * lambda_ * w.squaredNorm();
}

Eigen::VectorXd CompositeObjective::f1_grad(const Eigen::VectorXd& w) const {
  return g1_ * w - h1_;
}

Eigen::VectorXd CompositeObjective::rest_grad(const Eigen::VectorXd& w) const {
  return full_grad(w) - f1_grad(w);
}

double CompositeObjective::f1_smoothness() const {
  if (f1_lmax_ < 0.0) f1_lmax_ = power_iteration_lmax(g1_);
  return f1_lmax_;
}

double CompositeObjective::similarity_gap() const {
  if (sim_gap_ < 0.0) {
    Eigen::MatrixXd gap = g_full_ - g1_;
    gap.diagonal().array() += lambda_;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        gap, Eigen::EigenvaluesOnly);
    sim_gap_ = es.eigenvalues().cwiseAbs().maxCoeff();
  }
  return sim_gap_;
}

Eigen::VectorXd CompositeObjective::exact_prox(const Eigen::VectorXd& x_g,
                                               const Eigen::VectorXd& grad_rest,
                                               double theta) const {
  if (!(theta > 0.0))
    throw std::invalid_argument("exact_prox: theta must be positive");
  const double inv_theta = std::isinf(theta) ? 0.0 : 1.0 / theta;
  if (theta != cached_theta_) {
    Eigen::MatrixXd m = g1_;
    m.diagonal().array() += inv_theta;
    prox_ldlt_.compute(m);
    cached_theta_ = theta;
  }
  Eigen::VectorXd rhs = inv_theta * x_g + h1_ - grad_rest;
  Eigen::VectorXd x = prox_ldlt_.solve(rhs);
  // LDLT accepts semi-definite input, so verify the solve actually worked;
  // theta = inf with a rank-deficient server Gram has no unique minimizer.
  Eigen::MatrixXd m = g1_;
  m.diagonal().array() += inv_theta;
  const double resid = (m * x - rhs).norm();
  if (!std::isfinite(resid) || resid > 1e-8 * (1.0 + rhs.norm()))
    throw std::runtime_error("exact_prox: subproblem system is singular");
  return x;
}

Eigen::VectorXd subproblem_exact_ridge(const CompositeObjective& obj,
                                       const Eigen::VectorXd& x_g,
                                       const Eigen::VectorXd& grad_rest,
                                       double theta) {
  return obj.exact_prox(x_g, grad_rest, theta);
}

Eigen::VectorXd subproblem_ogmg(const CompositeObjective& obj,
                                const Eigen::VectorXd& x_g,
                                const Eigen::VectorXd& grad_rest, double theta,
                                int iters) {
  if (!(theta > 0.0))
    throw std::invalid_argument("subproblem_ogmg: theta must be positive");
  const double inv_theta = std::isinf(theta) ? 0.0 : 1.0 / theta;
  auto model_grad = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return grad_rest + inv_theta * (x - x_g) + obj.f1_grad(x);
  };
  const double smooth = inv_theta + obj.f1_smoothness();
  return ogmg_minimize(model_grad, smooth, x_g, iters);
}

Eigen::VectorXd ogmg_minimize(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
    double smoothness, Eigen::VectorXd x0, int n_iters) {
  if (n_iters < 0) throw std::invalid_argument("ogmg_minimize: n_iters < 0");
  if (!(smoothness > 0.0) || !std::isfinite(smoothness))
    throw std::invalid_argument("ogmg_minimize: smoothness must be positive");
  if (n_iters == 0) return x0;
  const int n = n_iters;
  // theta_tilde sequence, built backwards from theta_tilde[n] = 1
  std::vector<double> th(static_cast<std::size_t>(n) + 1);
  th[static_cast<std::size_t>(n)] = 1.0;
  for (int i = n - 1; i >= 1; --i) {
    const double t = th[static_cast<std::size_t>(i) + 1];
    th[static_cast<std::size_t>(i)] = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
  }
  if (n >= 1) {
    const double t1 = th[1];
    th[0] = 0.5 * (1.0 + std::sqrt(1.0 + 8.0 * t1 * t1));
  }
  Eigen::VectorXd x = x0;
  Eigen::VectorXd y_prev = x0;
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd y = x - grad(x) / smoothness;
    const double tk = th[static_cast<std::size_t>(k)];
    const double tk1 = th[static_cast<std::size_t>(k) + 1];
    const double c1 = ((tk - 1.0) * (2.0 * tk1 - 1.0)) / (tk * (2.0 * tk - 1.0));
    const double c2 = (2.0 * tk1 - 1.0) / (2.0 * tk - 1.0);
    x = y + c1 * (y - y_prev) + c2 * (y - x);
    y_prev = y;
  }
  // return the last gradient-step point: the trailing momentum combination is
  // only scaffolding for the next step and can carry a worst-case-sized
  // gradient even when the descent steps have already landed on the optimum
  return y_prev;
}

DivergenceError::DivergenceError(long long it)
    : std::runtime_error("solver diverged at outer iteration " +
                         std::to_string(it)),
      iteration(it) {}

SolveResult accel_extragradient(const CompositeObjective& obj,
                                const AlgParams& params,
                                const InnerSolver& inner,
                                Eigen::VectorXd x0, const StopRule& stop) {
  params.validate();
  if (x0.size() != obj.dim())
    throw std::invalid_argument("accel_extragradient: x0 dimension mismatch");
  if (!(stop.rel_tol >= 0.0) || !(stop.abs_tol >= 0.0))
    throw std::invalid_argument("accel_extragradient: tolerances must be >= 0");
  if (inner.kind == InnerSolver::Kind::ogmg && inner.ogmg_iters < 1)
    throw std::invalid_argument("accel_extragradient: ogmg_iters must be >= 1");

  SolveResult res;
  res.x = std::move(x0);
  Eigen::VectorXd x = res.x;
  Eigen::VectorXd x_f = x;
  const double g0 = obj.full_grad(x).norm();
  const double threshold = std::max(stop.rel_tol * g0, stop.abs_tol);
  const double blowup = 1e10 * std::max(g0, 1.0);
  res.final_grad_norm = g0;
  if (g0 <= threshold) {
    res.converged = true;
    return res;
  }
  for (long long k = 0; k < params.max_outer; ++k) {
    const Eigen::VectorXd x_g =
        params.momentum * x + (1.0 - params.momentum) * x_f;
    const Eigen::VectorXd gr = obj.rest_grad(x_g);
    double units = 0.0;
    if (inner.kind == InnerSolver::Kind::exact) {
      x_f = subproblem_exact_ridge(obj, x_g, gr, params.theta);
      units = inner.exact_work_units;
    } else {
      x_f = subproblem_ogmg(obj, x_g, gr, params.theta, inner.ogmg_iters);
      units = static_cast<double>(inner.ogmg_iters);
    }
    const Eigen::VectorXd gf = obj.full_grad(x_f);
    x += params.eta * params.alpha_reg * (x_f - x) - params.eta * gf;
    const double gn = gf.norm();
    res.trace.push_back({gn, units});
    res.inner_total += units;
    res.outer_iters = k + 1;
    res.final_grad_norm = gn;
    if (!std::isfinite(gn) || gn > blowup) throw DivergenceError(k + 1);
    if (gn <= threshold) {
      res.converged = true;
      break;
    }
  }
  res.x = x_f;
  return res;
}

}  // namespace dsplit
