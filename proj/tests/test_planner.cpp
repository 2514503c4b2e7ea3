#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "dsplit/planner.hpp"

using namespace dsplit;

namespace {

PlannerInput make_in(long long N, std::vector<double> taus, double tau_comm,
                     double gamma, double alpha, double beta) {
  PlannerInput in;
  in.N = N;
  in.timing.tau_local = std::move(taus);
  in.timing.tau_comm = tau_comm;
  in.consts.gamma = gamma;
  in.rates.alpha = alpha;
  in.rates.beta = beta;
  in.validate();
  return in;
}

double worker_makespan(const std::vector<long long>& b,
                       const std::vector<double>& tau) {
  double m = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i)
    m = std::max(m, tau[i] * static_cast<double>(b[i]));
  return m;
}

}  // namespace

TEST_CASE("equalize_workers reproduces hand-solved splits") {
  CHECK(equalize_workers(10, {1, 1}) == std::vector<long long>{5, 5});
  CHECK(equalize_workers(8, {1, 3}) == std::vector<long long>{6, 2});
  CHECK(equalize_workers(7, {2, 3, 6}) == std::vector<long long>{4, 2, 1});
  CHECK(worker_makespan(equalize_workers(7, {2, 3, 6}), {2, 3, 6}) ==
        doctest::Approx(8.0));
  CHECK(equalize_workers(0, {2, 5}) == std::vector<long long>{0, 0});
  CHECK(equalize_workers(0, {}).empty());
}

TEST_CASE("equalize_workers repairs a bad largest-remainder rounding") {
  // continuous split of 8 over tau=[4,1] is [1.6, 6.4]; plain rounding gives
  // [2,6] with makespan 8 while [1,7] finishes in 7
  const std::vector<double> tau{4, 1};
  const auto b = equalize_workers(8, tau);
  CHECK(b == std::vector<long long>{1, 7});
  CHECK(worker_makespan(b, tau) == doctest::Approx(7.0));
}

TEST_CASE("equalize_workers output is locally optimal under unit transfers") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> tau_d(0.2, 9.0);
  std::uniform_int_distribution<int> m_d(1, 6);
  std::uniform_int_distribution<long long> n_d(0, 300);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = m_d(rng);
    std::vector<double> tau(static_cast<std::size_t>(m));
    for (double& t : tau) t = tau_d(rng);
    const long long n_rest = n_d(rng);
    auto b = equalize_workers(n_rest, tau);
    long long sum = 0;
    for (long long v : b) sum += v;
    REQUIRE(sum == n_rest);
    const double base = worker_makespan(b, tau);
    for (std::size_t u = 0; u < b.size(); ++u) {
      if (b[u] == 0) continue;
      for (std::size_t v = 0; v < b.size(); ++v) {
        if (v == u) continue;
        auto moved = b;
        moved[u] -= 1;
        moved[v] += 1;
        CHECK(worker_makespan(moved, tau) >= base - 1e-12 * base);
      }
    }
  }
}

TEST_CASE("breakpoint_b10 matches the harmonic-pool arithmetic") {
  CHECK(breakpoint_b10(make_in(100, {1, 1}, 0, 0.5, 1, 1)) ==
        doctest::Approx(50.0));
  CHECK(breakpoint_b10(make_in(100, {1, 1, 1}, 0, 0.5, 1, 1)) ==
        doctest::Approx(100.0 / 3.0));
  CHECK(breakpoint_b10(make_in(90, {2, 1}, 0, 0.5, 1, 1)) ==
        doctest::Approx(30.0));
  CHECK_THROWS_AS(breakpoint_b10(make_in(10, {1}, 0, 0.5, 1, 1)),
                  std::invalid_argument);
}

TEST_CASE("objective_F evaluates both branch substitutions") {
  // N=2, two devices, tau=1, tau_comm=0, alpha=beta=1, b1=1 -> F=2 either way
  CHECK(objective_F(make_in(2, {1, 1}, 0, 1.0, 1, 1), 1.0) ==
        doctest::Approx(2.0));
  CHECK(objective_F(make_in(2, {1, 1}, 0, 0.5, 1, 1), 1.0) ==
        doctest::Approx(2.0));

  const PlannerInput in = make_in(100, {1, 2, 3}, 0.5, 0.5, 1.5, 0.25);
  CHECK_THROWS_AS(objective_F(in, 0.0), std::domain_error);
  CHECK_THROWS_AS(objective_F(in, 101.0), std::domain_error);
}

TEST_CASE("branch formulas coincide at the breakpoint") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> tau_d(0.3, 6.0);
  std::uniform_real_distribution<double> r_d(0.2, 3.0);
  std::uniform_int_distribution<int> n_d(2, 6);
  std::uniform_int_distribution<long long> N_d(30, 500);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = n_d(rng);
    std::vector<double> taus(static_cast<std::size_t>(n));
    for (double& t : taus) t = tau_d(rng);
    const PlannerInput in = make_in(N_d(rng), taus, r_d(rng),
                                    trial % 2 ? 1.0 : 0.5, r_d(rng), r_d(rng));
    const double b10 = breakpoint_b10(in);
    const double tau1 = in.timing.tau_local.front();
    const double s = in.worker_pool_rate();
    // the two arms of the max agree at the breakpoint...
    CHECK(tau1 * b10 ==
          doctest::Approx((static_cast<double>(in.N) - b10) * s).epsilon(1e-9));
    // ...so F is continuous across it
    CHECK(objective_F(in, b10 * (1.0 - 1e-9)) ==
          doctest::Approx(objective_F(in, b10 * (1.0 + 1e-9))).epsilon(1e-8));
  }
}

TEST_CASE("dF matches a central finite difference away from the kink") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> tau_d(0.5, 4.0);
  std::uniform_real_distribution<double> r_d(0.5, 2.0);
  std::uniform_real_distribution<double> tc_d(0.0, 5.0);
  std::uniform_int_distribution<int> n_d(2, 5);
  std::uniform_int_distribution<long long> N_d(20, 200);
  int points = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const int n = n_d(rng);
    std::vector<double> taus(static_cast<std::size_t>(n));
    for (double& t : taus) t = tau_d(rng);
    const PlannerInput in = make_in(N_d(rng), taus, tc_d(rng),
                                    trial % 2 ? 1.0 : 0.5, r_d(rng), r_d(rng));
    const double Nd = static_cast<double>(in.N);
    const double b10 = breakpoint_b10(in);
    std::uniform_real_distribution<double> b_d(std::max(1.0, 0.03 * Nd),
                                               0.98 * Nd);
    for (int k = 0; k < 15; ++k) {
      const double b = b_d(rng);
      if (std::abs(b - b10) < 0.01 * Nd) continue;
      const double h = 1e-4 * b;
      const double fd =
          (objective_F(in, b + h) - objective_F(in, b - h)) / (2.0 * h);
      CHECK(std::abs(dF(in, b) - fd) <= 1e-6);
      ++points;
    }
  }
  CHECK(points >= 100);
}

TEST_CASE("upper-branch derivative is positive at N for moderate comm cost") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> tau_d(0.5, 4.0);
  std::uniform_real_distribution<double> r_d(0.5, 2.0);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<double> taus{tau_d(rng), tau_d(rng), tau_d(rng)};
    const long long N = 50 + trial;
    std::uniform_real_distribution<double> tc_d(
        0.0, static_cast<double>(N) * taus.front());
    const PlannerInput in =
        make_in(N, taus, tc_d(rng), 1.0, r_d(rng), r_d(rng));
    CHECK(dF(in, static_cast<double>(N)) > 0.0);
  }
}

TEST_CASE("zero-comm upper-branch derivative has the simplified form") {
  const PlannerInput in = make_in(80, {1.5, 2, 2}, 0.0, 0.5, 1.25, 0.75);
  const double b10 = breakpoint_b10(in);
  const double tau1 = 1.5;
  for (double b : {b10 * 1.2, b10 * 1.7, 79.0}) {
    const double expect =
        0.75 * in.rates.alpha * tau1 * std::pow(b, -0.25) + in.rates.beta * tau1;
    CHECK(dF(in, b) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(dF(in, b) > 0.0);
  }
}

TEST_CASE("solve_cardano finds the unique positive root of the cubic") {
  // c*y^3 + a*y^2 + b with arguments passed as (b, a, c)
  REQUIRE(solve_cardano(-2, 0, 2).has_value());
  CHECK(*solve_cardano(-2, 0, 2) == doctest::Approx(1.0));
  REQUIRE(solve_cardano(-4, -1, 1).has_value());
  CHECK(*solve_cardano(-4, -1, 1) == doctest::Approx(4.0));
  REQUIRE(solve_cardano(-27, 0, 1).has_value());
  CHECK(*solve_cardano(-27, 0, 1) == doctest::Approx(9.0));

  // y^3 + 3y^2 + 2 has no positive root
  CHECK_FALSE(solve_cardano(2, 3, 1).has_value());
  // y^3 - (7/3)y^2 + 4/3 has roots 1, 2, -2/3: two positive -> ambiguous
  CHECK_FALSE(solve_cardano(4.0 / 3.0, -7.0 / 3.0, 1).has_value());

  CHECK_THROWS_AS(solve_cardano(0, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(solve_cardano(-2, 0, -1), std::invalid_argument);
  CHECK_THROWS_AS(solve_cardano(-2, 0, 0), std::invalid_argument);
}

TEST_CASE("newton_root is a safeguarded bracketing solver") {
  auto sq = [](double x) { return x * x - 4.0; };
  auto r = newton_root(sq, 1.0, 3.0, 1e-10);
  REQUIRE(r.has_value());
  CHECK(*r == doctest::Approx(2.0).epsilon(1e-9));

  auto pow_fn = [](double b) { return -std::pow(b, -1.5) + 1.0; };
  r = newton_root(pow_fn, 0.1, 10.0, 1e-10);
  REQUIRE(r.has_value());
  CHECK(*r == doctest::Approx(1.0).epsilon(1e-9));

  auto affine = [](double x) { return x + 5.0; };
  CHECK_FALSE(newton_root(affine, 0.0, 1.0, 1e-10).has_value());

  auto bad = [](double) { return std::numeric_limits<double>::quiet_NaN(); };
  CHECK_THROWS_AS(newton_root(bad, 0.0, 1.0, 1e-10), std::runtime_error);
  CHECK_THROWS_AS(newton_root(sq, 3.0, 1.0, 1e-10), std::invalid_argument);
}

TEST_CASE("interior_roots rejects cardano off gamma=1 and newton agrees with cardano") {
  CHECK_THROWS_AS(
      interior_roots(make_in(40, {1, 1}, 1, 0.5, 1, 1), RootMethod::cardano),
      std::invalid_argument);

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> tau_d(0.5, 5.0);
  std::uniform_real_distribution<double> r_d(0.3, 3.0);
  std::uniform_real_distribution<double> tc_d(0.0, 40.0);
  std::uniform_int_distribution<int> n_d(2, 6);
  std::uniform_int_distribution<long long> N_d(40, 1000);
  int compared = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = n_d(rng);
    std::vector<double> taus(static_cast<std::size_t>(n));
    for (double& t : taus) t = tau_d(rng);
    const PlannerInput in =
        make_in(N_d(rng), taus, tc_d(rng), 1.0, r_d(rng), r_d(rng));
    const BranchRoots nr = interior_roots(in, RootMethod::newton);
    const BranchRoots cr = interior_roots(in, RootMethod::cardano);
    if (nr.lower && cr.lower) {
      CHECK(*nr.lower == doctest::Approx(*cr.lower).epsilon(1e-8));
      ++compared;
    }
    if (nr.upper && cr.upper) {
      CHECK(*nr.upper == doctest::Approx(*cr.upper).epsilon(1e-8));
      ++compared;
    }
  }
  CHECK(compared >= 20);
}

TEST_CASE("plan handles the single-device case") {
  const PlannerInput in = make_in(37, {2.0}, 1.0, 0.5, 1, 1);
  const PlanResult res = plan(in);
  REQUIRE(res.allocation.n() == 1);
  CHECK(res.allocation.b1() == 37);
  CHECK(res.b1_continuous == doctest::Approx(37.0));
}

TEST_CASE("plan matches the brute-force oracle on the worked instance") {
  const PlannerInput in = make_in(50, {1, 3, 5}, 2.0, 1.0, 1, 1);
  const PlanResult p = plan(in);
  const PlanResult bf = brute_force_plan(in);
  CHECK(objective_F(in, static_cast<double>(p.allocation.b1())) <=
        1.01 * bf.objective_value);
  CHECK(p.objective_value <= bf.objective_value * (1.0 + 1e-9));
  CHECK(bf.method == PlanMethod::brute_force);
}

TEST_CASE("plan stays within 1% of brute force on random instances") {
  std::mt19937_64 rng(555);
  std::uniform_real_distribution<double> tau_d(0.4, 6.0);
  std::uniform_real_distribution<double> r_d(0.2, 4.0);
  std::uniform_int_distribution<int> n_d(1, 7);
  std::uniform_int_distribution<long long> N_d(10, 1500);
  std::uniform_real_distribution<double> l_d(-4.0, 6.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = n_d(rng);
    std::vector<double> taus(static_cast<std::size_t>(n));
    for (double& t : taus) t = tau_d(rng);
    const long long N = std::max<long long>(N_d(rng), n);
    const double gamma = trial % 2 ? 1.0 : 0.5;
    const PlannerInput in =
        make_in(N, taus, std::pow(10.0, l_d(rng)), gamma, r_d(rng), r_d(rng));
    const PlanResult p = plan(in);
    const PlanResult bf = brute_force_plan(in);
    CHECK(objective_F(in, static_cast<double>(p.allocation.b1())) <=
          1.01 * bf.objective_value);
    CHECK(p.allocation.total() == N);

    // equalization invariant: loaded workers finish within one unit
    const auto& b = p.allocation.b;
    const auto& tau = in.timing.tau_local;
    for (int i = 1; i < p.allocation.n(); ++i)
      for (int j = i + 1; j < p.allocation.n(); ++j) {
        const auto iu = static_cast<std::size_t>(i);
        const auto ju = static_cast<std::size_t>(j);
        if (b[iu] < 1 || b[ju] < 1) continue;
        CHECK(std::abs(tau[iu] * static_cast<double>(b[iu]) -
                       tau[ju] * static_cast<double>(b[ju])) <=
              std::max(tau[iu], tau[ju]) + 1e-9);
      }
  }
}

TEST_CASE("brute force dominates the uniform allocation") {
  const PlannerInput in = make_in(120, {1, 2, 4, 8}, 3.0, 0.5, 1.2, 0.4);
  const PlanResult bf = brute_force_plan(in);
  const Allocation uni = uniform_allocation(120, 4);
  CHECK(bf.objective_value <=
        objective_F(in, static_cast<double>(uni.b1())) + 1e-12);
  CHECK_THROWS_AS(
      brute_force_plan(make_in(200000, {1, 1}, 1, 0.5, 1, 1)),
      std::invalid_argument);
}

TEST_CASE("large-comm closed form reproduces the asymptotic minimizer") {
  // alpha=beta, tau=1, tau_comm=4 -> power argument is 1
  {
    const PlannerInput in = make_in(100, {1, 1, 1}, 4.0, 0.5, 2.0, 2.0);
    const ClosedFormResult cf = closed_form_large_comm(in);
    CHECK(cf.result.b1_continuous == doctest::Approx(1.0));
    CHECK(cf.result.method == PlanMethod::large_comm);
    CHECK_FALSE(cf.regime_ok);  // 4 < N*tau
    CHECK(cf.regime_ratio == doctest::Approx(4.0 / 100.0));
  }
  // alpha=beta=1, tau=1, tau_comm=64 -> 16^{4/5}
  {
    const PlannerInput in = make_in(100, {1, 1}, 64.0, 0.5, 1.0, 1.0);
    const ClosedFormResult cf = closed_form_large_comm(in);
    CHECK(cf.result.b1_continuous ==
          doctest::Approx(std::pow(16.0, 0.8)).epsilon(1e-12));
    CHECK(cf.result.b1_continuous == doctest::Approx(9.18958683997628));
  }
  // alpha*tau_comm = 1, beta*tau = 1, interior case: the constant 4^{1/5}+4^{-4/5}
  {
    const PlannerInput in = make_in(50, {1, 1}, 1.0, 0.5, 1.0, 1.0);
    const ClosedFormResult cf = closed_form_large_comm(in);
    CHECK(cf.approx_min_value ==
          doctest::Approx(std::pow(4.0, 0.2) + std::pow(4.0, -0.8)));
    CHECK(cf.approx_min_value == doctest::Approx(1.6494).epsilon(1e-4));
  }
  // boundary case: enormous tau_comm pushes the minimizer to N
  {
    const PlannerInput in = make_in(20, {1, 1}, 1e7, 0.5, 1.0, 1.0);
    const ClosedFormResult cf = closed_form_large_comm(in);
    CHECK(cf.result.b1_continuous == doctest::Approx(20.0));
    CHECK(cf.regime_ok);
    CHECK(cf.approx_min_value == doctest::Approx(1e7 / 20.0 + 20.0));
  }
  CHECK_THROWS_AS(closed_form_large_comm(make_in(30, {1, 1, 2}, 1e5, 0.5, 1, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(closed_form_large_comm(make_in(30, {1, 1}, 1e5, 1.0, 1, 1)),
                  std::invalid_argument);
}

TEST_CASE("plan tracks the large-comm closed form in its regime") {
  // uniform devices, tau_comm = N^2 * tau, interior minimizer
  const long long N = 200;
  const double tc = static_cast<double>(N) * static_cast<double>(N);
  // alpha/beta chosen so the unconstrained b1 is interior: (tc*r/4)^{4/5} < N
  const double ratio = 0.02;  // (200)^{5/4}*4/tc ~ 0.075; 0.02 is safely interior
  const PlannerInput in = make_in(N, {1, 1, 1, 1}, tc, 0.5, ratio, 1.0);
  const ClosedFormResult cf = closed_form_large_comm(in);
  REQUIRE(cf.regime_ok);
  REQUIRE(cf.result.b1_continuous < static_cast<double>(N));
  const PlanResult p = plan(in);
  CHECK(p.b1_continuous ==
        doctest::Approx(cf.result.b1_continuous).epsilon(0.02));
}

TEST_CASE("small-comm closed form stays at or below the breakpoint") {
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> tau_d(0.5, 5.0);
  std::uniform_real_distribution<double> r_d(0.2, 3.0);
  std::uniform_int_distribution<int> n_d(2, 6);
  std::uniform_int_distribution<long long> N_d(20, 800);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = n_d(rng);
    std::vector<double> taus(static_cast<std::size_t>(n));
    for (double& t : taus) t = tau_d(rng);
    const PlannerInput in = make_in(N_d(rng), taus, 0.0, 0.5, r_d(rng), r_d(rng));
    const ClosedFormResult cf = closed_form_small_comm(in);
    const double b10 = breakpoint_b10(in);
    CHECK(cf.result.b1_continuous <= b10 * (1.0 + 1e-12));
    CHECK(static_cast<double>(cf.result.allocation.b1()) <=
          std::ceil(b10) + 0.5);
    CHECK(cf.regime_ok);

    // with tau_comm = 0 the simplified objective IS the lower branch, so the
    // full-objective Newton plan must land on the same value
    const PlanResult p = plan(in);
    CHECK(cf.result.objective_value <= p.objective_value * 1.01);
    CHECK(p.objective_value <= cf.result.objective_value * 1.01);
  }
}

TEST_CASE("small-comm minimizer collapses toward 1 when server compute dominates") {
  const PlannerInput in = make_in(100, {1, 1}, 0.0, 0.5, 1.0, 1e6);
  const ClosedFormResult cf = closed_form_small_comm(in);
  CHECK(cf.result.allocation.b1() == 1);
  CHECK(cf.result.b1_continuous < 2.0);
}
