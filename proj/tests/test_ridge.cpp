#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "dsplit/ridge.hpp"

using namespace dsplit;

namespace {

bool same_dataset(const Dataset& a, const Dataset& b) {
  if (a.dim != b.dim || a.n() != b.n() || a.labels != b.labels) return false;
  for (std::size_t i = 0; i < a.n(); ++i) {
    if (a.rows[i].size() != b.rows[i].size()) return false;
    for (std::size_t k = 0; k < a.rows[i].size(); ++k)
      if (a.rows[i][k].index != b.rows[i][k].index ||
          a.rows[i][k].value != b.rows[i][k].value)
        return false;
  }
  return true;
}

Eigen::VectorXd direct_solve(const Dataset& d, double lambda) {
  const Eigen::MatrixXd g = gram_matrix(d);
  const Eigen::MatrixXd m =
      g + lambda * Eigen::MatrixXd::Identity(d.dim, d.dim);
  return m.ldlt().solve(xty(d));
}

}  // namespace

TEST_CASE("parse_libsvm reads the documented format") {
  {
    std::istringstream is("1 1:0.5 3:2.0");
    const Dataset d = parse_libsvm(is);
    REQUIRE(d.n() == 1);
    CHECK(d.labels[0] == 1.0);
    CHECK(d.dim == 3);
    REQUIRE(d.rows[0].size() == 2);
    CHECK(d.rows[0][0].index == 0);
    CHECK(d.rows[0][0].value == 0.5);
    CHECK(d.rows[0][1].index == 2);
    CHECK(d.rows[0][1].value == 2.0);
  }
  {
    std::istringstream is("+1 2:1\n-1 1:3");
    const Dataset d = parse_libsvm(is);
    REQUIRE(d.n() == 2);
    CHECK(d.labels[0] == 1.0);
    CHECK(d.labels[1] == -1.0);
    CHECK(d.dim == 2);
  }
  {
    std::istringstream is("# header comment\n\n2.5 1:1 2:2  # trailing\n\n");
    const Dataset d = parse_libsvm(is);
    REQUIRE(d.n() == 1);
    CHECK(d.labels[0] == 2.5);
    CHECK(d.rows[0].size() == 2);
  }
  {
    std::istringstream is("3.5\n1 1:1");  // empty row is legal
    const Dataset d = parse_libsvm(is);
    REQUIRE(d.n() == 2);
    CHECK(d.rows[0].empty());
    CHECK(d.dim == 1);
  }
}

TEST_CASE("parse_libsvm reports malformed input with line numbers") {
  auto expect_error_at = [](const std::string& text, std::size_t line) {
    std::istringstream is(text);
    try {
      parse_libsvm(is);
      FAIL("expected ParseError for: " << text);
    } catch (const ParseError& e) {
      CHECK(e.line == line);
      CHECK(std::string(e.what()).find("line " + std::to_string(line)) !=
            std::string::npos);
    }
  };
  expect_error_at("1 a:b", 1);
  expect_error_at("x 1:1", 1);
  expect_error_at("1 1:1\n1 3:1 2:1", 2);  // non-increasing index
  expect_error_at("1 0:5", 1);             // index below 1
  expect_error_at("1 1:1 1:2", 1);         // duplicate index
  expect_error_at("1 2:", 1);              // missing value
  expect_error_at("1 :2", 1);              // missing index
  expect_error_at("1 1:1\n2 2:two", 2);    // bad value
}

TEST_CASE("write_libsvm round-trips through the parser") {
  Dataset d;
  d.dim = 4;
  d.rows = {{{0, 0.5}, {3, -2.25}}, {}, {{1, 1e-7}, {2, 3.0}}};
  d.labels = {1.0, -0.125, 42.5};
  std::ostringstream os;
  write_libsvm(d, os);
  std::istringstream is(os.str());
  const Dataset back = parse_libsvm(is);
  CHECK(same_dataset(d, back));

  // synthetic data round-trips exactly too (17 significant digits)
  const Dataset syn = gen_synthetic(25, 3, 0.5, 11);
  std::ostringstream os2;
  write_libsvm(syn, os2);
  std::istringstream is2(os2.str());
  CHECK(same_dataset(syn, parse_libsvm(is2)));
}

TEST_CASE("gen_synthetic is deterministic and respects noise_sd=0") {
  const Dataset a = gen_synthetic(40, 6, 0.3, 99);
  const Dataset b = gen_synthetic(40, 6, 0.3, 99);
  CHECK(same_dataset(a, b));
  const Dataset c = gen_synthetic(40, 6, 0.3, 100);
  CHECK_FALSE(same_dataset(a, c));

  // exact linear labels: the least-squares residual vanishes
  const Dataset clean = gen_synthetic(60, 5, 0.0, 7);
  const Eigen::VectorXd w = direct_solve(clean, 1e-12);
  for (std::size_t i = 0; i < clean.n(); ++i) {
    double pred = 0.0;
    for (const auto& e : clean.rows[i]) pred += e.value * w[e.index];
    CHECK(std::abs(pred - clean.labels[i]) <= 1e-6);
  }

  const Dataset single = gen_synthetic(1, 3, 0.1, 5);
  CHECK(single.n() == 1);
  CHECK_THROWS_AS(gen_synthetic(0, 3, 0.1, 5), std::invalid_argument);
}

TEST_CASE("shard splits into a seeded partition") {
  const Dataset d = gen_synthetic(4, 2, 0.1, 3);
  Allocation alloc;
  alloc.b = {2, 1, 1};
  const ShardSet s = shard(d, alloc, 17);
  REQUIRE(s.shards.size() == 3);
  CHECK(s.shards[0].n() == 2);
  CHECK(s.shards[1].n() == 1);
  CHECK(s.shards[2].n() == 1);
  for (const Dataset& sh : s.shards) CHECK(sh.dim == d.dim);

  // union = original rows (as multiset of labels; labels are a.s. distinct)
  std::vector<double> got, want = d.labels;
  for (const Dataset& sh : s.shards)
    got.insert(got.end(), sh.labels.begin(), sh.labels.end());
  std::sort(got.begin(), got.end());
  std::sort(want.begin(), want.end());
  CHECK(got == want);

  // determinism and coverage of the permutation
  const ShardSet s2 = shard(d, alloc, 17);
  CHECK(s2.perm == s.perm);
  for (std::size_t i = 0; i < s.shards.size(); ++i)
    CHECK(same_dataset(s.shards[i], s2.shards[i]));

  Allocation all;
  all.b = {4};
  const ShardSet one = shard(d, all, 9);
  REQUIRE(one.shards.size() == 1);
  CHECK(one.shards[0].n() == 4);

  Allocation bad;
  bad.b = {2, 1};
  CHECK_THROWS_AS(shard(d, bad, 1), std::invalid_argument);
}

TEST_CASE("ridge_value_grad matches the closed-form pieces") {
  const Dataset d = gen_synthetic(30, 4, 0.4, 21);
  const double lambda = 0.2;

  // w = 0: grad = -X^T y / n
  const ValueGrad at_zero =
      ridge_value_grad(d, lambda, Eigen::VectorXd::Zero(4));
  const Eigen::VectorXd expect = -xty(d);
  CHECK((at_zero.grad - expect).lpNorm<Eigen::Infinity>() <= 1e-12);

  // gradient vanishes at the direct-solve optimum
  const Eigen::VectorXd w_star = direct_solve(d, lambda);
  CHECK(ridge_value_grad(d, lambda, w_star).grad.norm() <= 1e-10);

  // central finite differences on a random point
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd w(4);
  for (int j = 0; j < 4; ++j) w[j] = normal(rng);
  const ValueGrad vg = ridge_value_grad(d, lambda, w);
  for (int j = 0; j < 4; ++j) {
    const double h = 1e-6;
    Eigen::VectorXd wp = w, wm = w;
    wp[j] += h;
    wm[j] -= h;
    const double fd = (ridge_value_grad(d, lambda, wp).value -
                       ridge_value_grad(d, lambda, wm).value) /
                      (2.0 * h);
    CHECK(std::abs(vg.grad[j] - fd) <= 1e-6);
  }

  CHECK_THROWS_AS(ridge_value_grad(d, lambda, Eigen::VectorXd::Zero(5)),
                  std::invalid_argument);
  Dataset empty;
  empty.dim = 4;
  CHECK_THROWS_AS(ridge_value_grad(empty, lambda, Eigen::VectorXd::Zero(4)),
                  std::invalid_argument);
}

TEST_CASE("full gradient is the sample-weighted average of shard gradients") {
  const Dataset d = gen_synthetic(50, 5, 0.3, 31);
  const double lambda = 0.05;
  Allocation alloc;
  alloc.b = {17, 20, 13, 0};
  const ShardSet s = shard(d, alloc, 8);

  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int rep = 0; rep < 5; ++rep) {
    Eigen::VectorXd w(5);
    for (int j = 0; j < 5; ++j) w[j] = normal(rng);
    const Eigen::VectorXd full = ridge_value_grad(d, lambda, w).grad;
    Eigen::VectorXd agg = Eigen::VectorXd::Zero(5);
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < s.shards.size(); ++i) {
      if (s.shards[i].n() == 0) continue;
      const double wi =
          static_cast<double>(s.shards[i].n()) / static_cast<double>(d.n());
      agg += wi * ridge_value_grad(s.shards[i], lambda, w).grad;
      weight_sum += wi;
    }
    CHECK(weight_sum == doctest::Approx(1.0));
    CHECK((full - agg).lpNorm<Eigen::Infinity>() <= 1e-10);
  }
}

TEST_CASE("gram_matrix and xty use the 1/n normalization") {
  Dataset d;
  d.dim = 2;
  d.rows = {{{0, 1.0}}, {{1, 1.0}}};  // X = I2
  d.labels = {3.0, 5.0};
  const Eigen::MatrixXd g = gram_matrix(d);
  CHECK(g(0, 0) == doctest::Approx(0.5));
  CHECK(g(1, 1) == doctest::Approx(0.5));
  CHECK(g(0, 1) == doctest::Approx(0.0));
  const Eigen::VectorXd v = xty(d);
  CHECK(v[0] == doctest::Approx(1.5));
  CHECK(v[1] == doctest::Approx(2.5));
}

TEST_CASE("power_iteration_lmax agrees with a dense eigensolver") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::MatrixXd b(8, 6);
    for (int i = 0; i < b.rows(); ++i)
      for (int j = 0; j < b.cols(); ++j) b(i, j) = normal(rng);
    const Eigen::MatrixXd sym = b.transpose() * b;
    const double lmax = power_iteration_lmax(sym);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    CHECK(lmax ==
          doctest::Approx(es.eigenvalues().maxCoeff()).epsilon(1e-6));
  }

  // tiny iteration cap on a still-moving estimate -> reported non-convergence
  Eigen::MatrixXd slow = Eigen::MatrixXd::Zero(2, 2);
  slow(0, 0) = 1.0;
  slow(1, 1) = 0.9;
  CHECK_THROWS_AS(power_iteration_lmax(slow, 1e-16, 3), std::runtime_error);
}

TEST_CASE("spectral_constants computes L from the gram spectrum and mu from lambda") {
  Dataset ident;
  ident.dim = 2;
  ident.rows = {{{0, 1.0}}, {{1, 1.0}}};
  ident.labels = {1.0, 1.0};
  RidgeProblem p{ident, 0.1};
  const SpectralConstants sc = spectral_constants(p);
  CHECK(sc.L == doctest::Approx(0.6));
  CHECK(sc.mu == doctest::Approx(0.1));

  // identity gram: lambda-min option gives the same eigenvalue
  const SpectralConstants scm = spectral_constants(p, true);
  CHECK(scm.mu == doctest::Approx(0.6));

  Dataset zero;
  zero.dim = 2;
  zero.rows = {{}, {}};
  zero.labels = {0.0, 0.0};
  RidgeProblem pz{zero, 0.25};
  const SpectralConstants scz = spectral_constants(pz);
  CHECK(scz.L == doctest::Approx(0.25));
  CHECK(scz.mu == doctest::Approx(0.25));
  CHECK_THROWS_AS(spectral_constants(RidgeProblem{zero, 0.0}),
                  std::invalid_argument);

  // scaling X by 2 scales L - lambda by 4
  const Dataset d = gen_synthetic(40, 4, 0.2, 13);
  Dataset d2 = d;
  for (auto& row : d2.rows)
    for (auto& e : row) e.value *= 2.0;
  const double l1 = spectral_constants(RidgeProblem{d, 0.3}).L - 0.3;
  const double l2 = spectral_constants(RidgeProblem{d2, 0.3}).L - 0.3;
  CHECK(l2 == doctest::Approx(4.0 * l1).epsilon(1e-6));
}
