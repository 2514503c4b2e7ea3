#include "dsplit/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace dsplit {

namespace {

constexpr double kRootTol = 1e-10;     // on |dF|, relative to bracket endpoints
constexpr double kBoundarySlack = 1e-12;

double pow_checked(double base, double e) { return std::pow(base, e); }

// Real roots of c*y^3 + a*y^2 + b = 0, polished by a few Newton steps.
std::vector<double> cubic_real_roots(double c, double a, double b) {
  std::vector<double> roots;
  // depressed form t^3 + p*t + q = 0 with y = t - a/(3c)
  const double shift = a / (3.0 * c);
  const double p = -a * a / (3.0 * c * c);
  const double q = (2.0 * a * a * a + 27.0 * c * c * b) / (27.0 * c * c * c);
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  if (disc > 0.0) {
    const double r = std::sqrt(disc);
    const double u = std::cbrt(-q / 2.0 + r);
    const double v = (u != 0.0) ? -p / (3.0 * u) : std::cbrt(-q / 2.0 - r);
    roots.push_back(u + v - shift);
  } else if (p == 0.0 && q == 0.0) {
    roots.push_back(-shift);
  } else {
    // three real roots, trigonometric form
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k)
      roots.push_back(m * std::cos(phi - 2.0 * M_PI * k / 3.0) - shift);
  }
  for (double& y : roots) {
    for (int it = 0; it < 3; ++it) {
      const double f = c * y * y * y + a * y * y + b;
      const double fp = 3.0 * c * y * y + 2.0 * a * y;
      if (fp == 0.0 || !std::isfinite(f)) break;
      y -= f / fp;
    }
  }
  return roots;
}

}  // namespace

PlannerInput PlannerInput::make(long long N, TimingModel timing,
                                ProblemConstants consts) {
  PlannerInput in;
  in.N = N;
  in.timing = std::move(timing);
  in.consts = consts;
  in.rates = derived_rates(consts);
  in.validate();
  return in;
}

void PlannerInput::validate() const {
  timing.validate();
  consts.validate();
  if (N < timing.n())
    throw std::invalid_argument("planner: need N >= number of devices");
  if (!(rates.alpha > 0.0) || !(rates.beta > 0.0))
    throw std::invalid_argument("planner: rates must be positive");
}

double PlannerInput::worker_pool_rate() const {
  if (timing.n() < 2)
    throw std::invalid_argument("planner: no workers");
  double inv = 0.0;
  for (int i = 1; i < timing.n(); ++i)
    inv += 1.0 / timing.tau_local[static_cast<std::size_t>(i)];
  return 1.0 / inv;
}

const char* to_string(PlanMethod m) {
  switch (m) {
    case PlanMethod::newton: return "newton";
    case PlanMethod::cardano: return "cardano";
    case PlanMethod::small_comm: return "small_comm";
    case PlanMethod::large_comm: return "large_comm";
    case PlanMethod::boundary: return "boundary";
    case PlanMethod::brute_force: return "brute_force";
  }
  return "unknown";
}

std::vector<long long> equalize_workers(long long n_rest,
                                        const std::vector<double>& tau_workers) {
  if (n_rest < 0) throw std::invalid_argument("equalize: n_rest must be >= 0");
  const std::size_t m = tau_workers.size();
  if (m == 0) {
    if (n_rest > 0)
      throw std::invalid_argument("equalize: samples left but no workers");
    return {};
  }
  for (double t : tau_workers)
    if (!(t > 0.0)) throw std::invalid_argument("equalize: tau must be positive");

  double inv_sum = 0.0;
  for (double t : tau_workers) inv_sum += 1.0 / t;
  std::vector<long long> b(m, 0);
  std::vector<std::pair<double, std::size_t>> frac(m);
  long long assigned = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double ideal =
        static_cast<double>(n_rest) / (tau_workers[i] * inv_sum);
    b[i] = static_cast<long long>(std::floor(ideal));
    frac[i] = {ideal - std::floor(ideal), i};
    assigned += b[i];
  }
  std::sort(frac.begin(), frac.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });
  for (long long r = 0; r < n_rest - assigned; ++r)
    b[frac[static_cast<std::size_t>(r)].second] += 1;

  // Largest-remainder rounding can leave a single-unit transfer that lowers
  // the makespan when tau values are far apart; repair greedily.
  auto time_of = [&](std::size_t i) {
    return tau_workers[i] * static_cast<double>(b[i]);
  };
  bool improved = true;
  while (improved) {
    improved = false;
    std::size_t u = 0;
    for (std::size_t i = 1; i < m; ++i)
      if (time_of(i) > time_of(u)) u = i;
    if (b[u] == 0) break;
    const double cur_max = time_of(u);
    double best_max = cur_max;
    std::size_t best_v = m;
    for (std::size_t v = 0; v < m; ++v) {
      if (v == u) continue;
      double new_max = tau_workers[u] * static_cast<double>(b[u] - 1);
      new_max = std::max(new_max, tau_workers[v] * static_cast<double>(b[v] + 1));
      for (std::size_t i = 0; i < m; ++i)
        if (i != u && i != v) new_max = std::max(new_max, time_of(i));
      if (new_max < best_max) {
        best_max = new_max;
        best_v = v;
      }
    }
    if (best_v != m) {
      b[u] -= 1;
      b[best_v] += 1;
      improved = true;
    }
  }
  return b;
}

double breakpoint_b10(const PlannerInput& in) {
  in.validate();
  const double s = in.worker_pool_rate();
  const double tau1 = in.timing.tau_local.front();
  return static_cast<double>(in.N) * s / (tau1 + s);
}

double objective_F(const PlannerInput& in, double b1) {
  if (!(b1 > 0.0) || b1 > static_cast<double>(in.N) * (1.0 + kBoundarySlack))
    throw std::domain_error("objective_F: b1 outside (0, N]");
  const double tau1 = in.timing.tau_local.front();
  double pass = tau1 * b1;
  if (in.n() > 1) {
    const double s = in.worker_pool_rate();
    pass = std::max(pass, (static_cast<double>(in.N) - b1) * s);
  }
  const double q = in.consts.gamma / 2.0;
  return (pass + in.timing.tau_comm) * in.rates.alpha * pow_checked(b1, -q) +
         tau1 * b1 * in.rates.beta;
}

double dF(const PlannerInput& in, double b1) {
  if (!(b1 > 0.0) || b1 > static_cast<double>(in.N) * (1.0 + kBoundarySlack))
    throw std::domain_error("dF: b1 outside (0, N]");
  const double tau1 = in.timing.tau_local.front();
  const double alpha = in.rates.alpha;
  const double beta = in.rates.beta;
  const double tc = in.timing.tau_comm;
  const double q = in.consts.gamma / 2.0;
  const double Nd = static_cast<double>(in.N);

  bool lower_branch = false;
  double s = 0.0;
  if (in.n() > 1) {
    s = in.worker_pool_rate();
    lower_branch = b1 <= breakpoint_b10(in) * (1.0 + kBoundarySlack);
  }
  if (lower_branch) {
    // F1(b) = (N*s + tc)*alpha*b^(-q) - s*alpha*b^(1-q) + tau1*beta*b
    return -q * (Nd * s + tc) * alpha * pow_checked(b1, -q - 1.0) -
           (1.0 - q) * s * alpha * pow_checked(b1, -q) + tau1 * beta;
  }
  // F2(b) = tc*alpha*b^(-q) + tau1*alpha*b^(1-q) + tau1*beta*b
  return -q * tc * alpha * pow_checked(b1, -q - 1.0) +
         (1.0 - q) * tau1 * alpha * pow_checked(b1, -q) + tau1 * beta;
}

std::optional<double> solve_cardano(double coef_m32, double coef_m12,
                                    double coef_0) {
  if (coef_m12 == 0.0 && coef_m32 == 0.0 && coef_0 == 0.0)
    throw std::invalid_argument("cardano: all coefficients zero");
  if (!(coef_0 > 0.0))
    throw std::invalid_argument("cardano: constant coefficient must be positive");
  std::vector<double> roots = cubic_real_roots(coef_0, coef_m12, coef_m32);
  std::vector<double> positive;
  for (double y : roots) {
    if (!(y > 0.0) || !std::isfinite(y)) continue;
    bool dup = false;
    for (double z : positive)
      if (std::abs(z - y) <= 1e-9 * std::max(std::abs(z), std::abs(y))) dup = true;
    if (!dup) positive.push_back(y);
  }
  if (positive.size() != 1) return std::nullopt;
  return positive.front() * positive.front();
}

std::optional<double> newton_root(const std::function<double(double)>& deriv,
                                  double lo, double hi, double tol) {
  if (!(lo < hi)) throw std::invalid_argument("newton_root: need lo < hi");
  double fa = deriv(lo);
  double fb = deriv(hi);
  if (!std::isfinite(fa) || !std::isfinite(fb))
    throw std::runtime_error("newton_root: non-finite derivative at bracket");
  if (std::abs(fa) <= tol) return lo;
  if (std::abs(fb) <= tol) return hi;
  if ((fa > 0.0) == (fb > 0.0)) return std::nullopt;

  double a = lo, b = hi;
  double x = 0.5 * (a + b);
  for (int it = 0; it < 200; ++it) {
    const double fx = deriv(x);
    if (!std::isfinite(fx))
      throw std::runtime_error("newton_root: non-finite derivative");
    if (std::abs(fx) <= tol) return x;
    if ((fx > 0.0) == (fa > 0.0)) {
      a = x;
      fa = fx;
    } else {
      b = x;
      fb = fx;
    }
    if (b - a <= 1e-15 * std::max(1.0, std::abs(x))) return x;

    double h = std::max(std::abs(x), 1.0) * 1e-7;
    h = std::min({h, 0.5 * (x - a) + 0.25 * (b - a), 0.5 * (b - x) + 0.25 * (b - a)});
    double next = std::numeric_limits<double>::quiet_NaN();
    if (h > 0.0) {
      const double slope = (deriv(std::min(x + h, b)) - deriv(std::max(x - h, a))) /
                           (std::min(x + h, b) - std::max(x - h, a));
      if (std::isfinite(slope) && slope != 0.0) next = x - fx / slope;
    }
    if (!std::isfinite(next) || next <= a || next >= b) next = 0.5 * (a + b);
    x = next;
  }
  return x;
}

namespace {

// Walks lo downward from hi until deriv(lo) is finite and negative. The
// branch derivatives tend to -inf near zero, so a negative endpoint exists
// whenever the branch has an interior stationary point.
std::optional<double> probe_negative_endpoint(
    const std::function<double(double)>& deriv, double hi) {
  double lo = hi * 0.5;
  for (int it = 0; it < 400 && lo > 0.0; ++it) {
    const double v = deriv(lo);
    if (std::isfinite(v) && v < 0.0) return lo;
    if (!std::isfinite(v)) {
      lo *= 4.0;  // overshot into overflow territory
      if (lo >= hi) return std::nullopt;
      continue;
    }
    lo *= 0.0625;
  }
  return std::nullopt;
}

std::optional<double> branch_root_newton(double lo, double hi,
                                         const std::function<double(double)>& d) {
  if (!(lo < hi)) return std::nullopt;
  const double fhi = d(hi);
  if (!std::isfinite(fhi) || fhi <= 0.0) return std::nullopt;  // no sign change
  const double flo = d(lo);
  double left = lo;
  if (!(std::isfinite(flo) && flo < 0.0)) {
    auto probed = probe_negative_endpoint(d, hi);
    if (!probed) return std::nullopt;
    left = *probed;
  }
  // Tighten the bracket before deriving the tolerance: the branch derivative
  // blows up like b^(-q-1) near zero, and a tolerance scaled off that value
  // would let newton_root stop far from the root. Each branch derivative has
  // a single zero, so doubling while still negative keeps a valid bracket.
  while (2.0 * left < hi) {
    const double v = d(2.0 * left);
    if (!std::isfinite(v) || v >= 0.0) break;
    left = 2.0 * left;
  }
  const double tol = kRootTol * (std::abs(d(left)) + std::abs(fhi));
  return newton_root(d, left, hi, tol);
}

}  // namespace

BranchRoots interior_roots(const PlannerInput& in, RootMethod method) {
  in.validate();
  BranchRoots out;
  const double tau1 = in.timing.tau_local.front();
  const double alpha = in.rates.alpha;
  const double beta = in.rates.beta;
  const double tc = in.timing.tau_comm;
  const double Nd = static_cast<double>(in.N);
  const bool has_workers = in.n() > 1;
  const double b10 = has_workers ? breakpoint_b10(in) : 0.0;

  if (method == RootMethod::cardano) {
    if (in.consts.gamma != 1.0)
      throw std::invalid_argument("cardano root method requires gamma = 1");
    if (has_workers) {
      const double s = in.worker_pool_rate();
      auto x = solve_cardano(-0.5 * (Nd * s + tc) * alpha, -0.5 * s * alpha,
                             tau1 * beta);
      if (x && *x > 0.0 && *x <= b10 * (1.0 + kBoundarySlack))
        out.lower = std::min(*x, b10);
    }
    if (tc > 0.0) {
      auto x = solve_cardano(-0.5 * tc * alpha, 0.5 * tau1 * alpha, tau1 * beta);
      if (x && *x > b10 && *x <= Nd * (1.0 + kBoundarySlack))
        out.upper = std::min(*x, Nd);
    }
    return out;
  }

  const double q = in.consts.gamma / 2.0;
  if (has_workers) {
    const double s = in.worker_pool_rate();
    auto d1 = [&](double b) {
      return -q * (Nd * s + tc) * alpha * pow_checked(b, -q - 1.0) -
             (1.0 - q) * s * alpha * pow_checked(b, -q) + tau1 * beta;
    };
    out.lower = branch_root_newton(b10 * 1e-6, b10, d1);
  }
  auto d2 = [&](double b) {
    return -q * tc * alpha * pow_checked(b, -q - 1.0) +
           (1.0 - q) * tau1 * alpha * pow_checked(b, -q) + tau1 * beta;
  };
  const double lo2 = has_workers ? b10 : std::min(1.0, Nd) * 1e-6;
  if (lo2 < Nd) {
    // F2' is negative near b10 only when comm costs dominate; check cheaply.
    if (d2(std::max(lo2, Nd * 1e-12)) < 0.0)
      out.upper = branch_root_newton(std::max(lo2, Nd * 1e-12), Nd, d2);
  }
  return out;
}

namespace {

struct Candidate {
  double b1;
  PlanMethod tag;
};

PlanResult assemble_plan(const PlannerInput& in, double b1_cont,
                         double objective, PlanMethod tag) {
  PlanResult res;
  res.b1_continuous = b1_cont;
  res.objective_value = objective;
  res.method = tag;

  const double Nd = static_cast<double>(in.N);
  std::vector<long long> ints;
  auto push_int = [&](double v) {
    for (double c : {std::floor(v), std::ceil(v)}) {
      const long long b = static_cast<long long>(
          std::clamp(c, 1.0, Nd));
      if (std::find(ints.begin(), ints.end(), b) == ints.end()) ints.push_back(b);
    }
  };
  if (in.n() == 1) {
    // a lone server must hold everything; there is nothing to optimize
    push_int(Nd);
  } else {
    push_int(b1_cont);
    push_int(1.0);
    push_int(Nd);
    push_int(breakpoint_b10(in));
  }

  long long best = ints.front();
  double best_f = std::numeric_limits<double>::infinity();
  std::sort(ints.begin(), ints.end());
  for (long long b : ints) {
    const double f = objective_F(in, static_cast<double>(b));
    if (f < best_f) {
      best_f = f;
      best = b;
    }
  }

  res.allocation.b.assign(static_cast<std::size_t>(in.n()), 0);
  res.allocation.b[0] = best;
  if (in.n() > 1) {
    std::vector<double> tau_workers(in.timing.tau_local.begin() + 1,
                                    in.timing.tau_local.end());
    auto w = equalize_workers(in.N - best, tau_workers);
    std::copy(w.begin(), w.end(), res.allocation.b.begin() + 1);
  }
  res.allocation.validate();
  return res;
}

}  // namespace

PlanResult plan(const PlannerInput& in) {
  return plan(in, in.consts.gamma == 1.0 ? RootMethod::cardano
                                         : RootMethod::newton);
}

PlanResult plan(const PlannerInput& in, RootMethod method) {
  in.validate();
  const double Nd = static_cast<double>(in.N);
  if (in.n() == 1)
    return assemble_plan(in, Nd, objective_F(in, Nd), PlanMethod::boundary);

  const PlanMethod root_tag =
      method == RootMethod::cardano ? PlanMethod::cardano : PlanMethod::newton;
  BranchRoots roots = interior_roots(in, method);
  std::vector<Candidate> cands;
  if (roots.lower) cands.push_back({*roots.lower, root_tag});
  if (roots.upper) cands.push_back({*roots.upper, root_tag});
  cands.push_back({breakpoint_b10(in), PlanMethod::boundary});
  cands.push_back({1.0, PlanMethod::boundary});
  cands.push_back({Nd, PlanMethod::boundary});

  const Candidate* best = nullptr;
  double best_f = std::numeric_limits<double>::infinity();
  for (const Candidate& c : cands) {
    if (!(c.b1 > 0.0) || c.b1 > Nd) continue;
    const double f = objective_F(in, c.b1);
    if (f < best_f) {
      best_f = f;
      best = &c;
    }
  }
  return assemble_plan(in, best->b1, best_f, best->tag);
}

PlanResult brute_force_plan(const PlannerInput& in) {
  in.validate();
  if (in.N > 100000)
    throw std::invalid_argument("brute_force_plan: N too large");
  long long best = 1;
  double best_f = std::numeric_limits<double>::infinity();
  // with no workers only b1 = N is feasible
  for (long long b = in.n() == 1 ? in.N : 1; b <= in.N; ++b) {
    const double f = objective_F(in, static_cast<double>(b));
    if (f < best_f) {
      best_f = f;
      best = b;
    }
  }
  PlanResult res =
      assemble_plan(in, static_cast<double>(best), best_f, PlanMethod::brute_force);
  // keep the exact integer argmin even if a neighbor rounds better
  if (res.allocation.b1() != best) {
    res.allocation.b[0] = best;
    if (in.n() > 1) {
      std::vector<double> tau_workers(in.timing.tau_local.begin() + 1,
                                      in.timing.tau_local.end());
      auto w = equalize_workers(in.N - best, tau_workers);
      std::copy(w.begin(), w.end(), res.allocation.b.begin() + 1);
    }
  }
  return res;
}

ClosedFormResult closed_form_large_comm(const PlannerInput& in) {
  in.validate();
  if (in.consts.gamma != 0.5)
    throw std::invalid_argument("large_comm closed form requires gamma = 1/2");
  double tau_max = in.timing.tau_local.front();
  if (in.n() > 1) {
    double wmin = in.timing.tau_local[1], wmax = in.timing.tau_local[1];
    for (int i = 1; i < in.n(); ++i) {
      wmin = std::min(wmin, in.timing.tau_local[static_cast<std::size_t>(i)]);
      wmax = std::max(wmax, in.timing.tau_local[static_cast<std::size_t>(i)]);
    }
    if (wmax - wmin > 1e-9 * wmax)
      throw std::invalid_argument("large_comm closed form requires uniform worker tau");
    tau_max = std::max(tau_max, wmax);
  }
  const double tau1 = in.timing.tau_local.front();
  const double alpha = in.rates.alpha;
  const double beta = in.rates.beta;
  const double tc = in.timing.tau_comm;
  const double Nd = static_cast<double>(in.N);

  ClosedFormResult out;
  out.regime_ratio = tc / (Nd * tau_max);
  out.regime_ok = out.regime_ratio > 1.0;

  const double b1_unconstrained =
      std::pow(tc * alpha / (4.0 * beta * tau1), 0.8);
  const double c45 = std::pow(4.0, 0.2) + std::pow(4.0, -0.8);
  double b1_cont;
  if (b1_unconstrained < Nd) {
    b1_cont = std::max(1.0, b1_unconstrained);
    out.approx_min_value = std::pow(alpha * tc, 0.8) *
                           std::pow(beta * tau1, 0.2) * c45;
  } else {
    b1_cont = Nd;
    out.approx_min_value = alpha * tc / Nd + beta * tau1 * Nd;
  }
  out.result = assemble_plan(in, b1_cont, objective_F(in, b1_cont),
                             PlanMethod::large_comm);
  return out;
}

ClosedFormResult closed_form_small_comm(const PlannerInput& in) {
  in.validate();
  if (in.consts.gamma != 0.5)
    throw std::invalid_argument("small_comm closed form requires gamma = 1/2");
  if (in.n() < 2)
    throw std::invalid_argument("small_comm closed form requires workers");
  const double tau1 = in.timing.tau_local.front();
  const double s = in.worker_pool_rate();
  const double alpha = in.rates.alpha;
  const double beta = in.rates.beta;
  const double Nd = static_cast<double>(in.N);
  const double b10 = breakpoint_b10(in);

  double tau_min = tau1;
  for (double t : in.timing.tau_local) tau_min = std::min(tau_min, t);

  ClosedFormResult out;
  out.regime_ratio = in.timing.tau_comm / tau_min;
  out.regime_ok = out.regime_ratio <= 1e-3;

  // d/db [ alpha*s*(N-b)*b^(-1/4) + tau1*beta*b ]
  auto d = [&](double b) {
    return alpha * s *
               (-0.25 * Nd * std::pow(b, -1.25) - 0.75 * std::pow(b, -0.25)) +
           tau1 * beta;
  };
  double b1_cont = b10;
  if (d(b10) > 0.0) {
    auto root = branch_root_newton(b10 * 1e-6, b10, d);
    if (root) b1_cont = std::min(*root, b10);
  }
  out.result = assemble_plan(in, b1_cont, objective_F(in, b1_cont),
                             PlanMethod::small_comm);
  out.approx_min_value =
      alpha * s * (Nd - b1_cont) * std::pow(b1_cont, -0.25) +
      tau1 * beta * b1_cont;
  return out;
}

}  // namespace dsplit
