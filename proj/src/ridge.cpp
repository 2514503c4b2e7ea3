#include "dsplit/ridge.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace dsplit {

void Dataset::validate() const {
  if (rows.size() != labels.size())
    throw std::invalid_argument("dataset: rows/labels length mismatch");
  if (dim < 0) throw std::invalid_argument("dataset: negative dim");
  for (const auto& row : rows) {
    int prev = -1;
    for (const auto& e : row) {
      if (e.index <= prev || e.index >= dim)
        throw std::invalid_argument("dataset: bad feature index");
      prev = e.index;
    }
  }
}

ParseError::ParseError(std::size_t line_, const std::string& what_)
    : std::runtime_error("line " + std::to_string(line_) + ": " + what_),
      line(line_) {}

namespace {

bool parse_double(std::string_view sv, double& out) {
  const char* first = sv.data();
  const char* last = sv.data() + sv.size();
  if (first != last && *first == '+') ++first;  // from_chars rejects leading +
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

Dataset parse_libsvm(std::istream& is) {
  Dataset d;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank or comment-only

    double label;
    if (!parse_double(tok, label))
      throw ParseError(lineno, "bad label '" + tok + "'");
    std::vector<SparseEntry> row;
    int prev_index = 0;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        throw ParseError(lineno, "expected index:value, got '" + tok + "'");
      int index = 0;
      {
        const char* first = tok.data();
        const char* last = tok.data() + colon;
        auto [ptr, ec] = std::from_chars(first, last, index);
        if (ec != std::errc() || ptr != last || index < 1)
          throw ParseError(lineno, "bad feature index '" +
                                       tok.substr(0, colon) + "'");
      }
      double value;
      if (!parse_double(std::string_view(tok).substr(colon + 1), value))
        throw ParseError(lineno, "bad feature value '" +
                                     tok.substr(colon + 1) + "'");
      if (index <= prev_index)
        throw ParseError(lineno, "feature indices must be strictly increasing");
      prev_index = index;
      row.push_back({index - 1, value});
      d.dim = std::max(d.dim, index);
    }
    d.rows.push_back(std::move(row));
    d.labels.push_back(label);
  }
  return d;
}

Dataset parse_libsvm_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  return parse_libsvm(f);
}

void write_libsvm(const Dataset& d, std::ostream& os) {
  d.validate();
  char buf[64];
  for (std::size_t i = 0; i < d.n(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", d.labels[i]);
    os << buf;
    for (const auto& e : d.rows[i]) {
      std::snprintf(buf, sizeof buf, "%.17g", e.value);
      os << ' ' << (e.index + 1) << ':' << buf;
    }
    os << '\n';
  }
}

Dataset gen_synthetic(long long n, int dim, double noise_sd,
                      std::uint64_t seed) {
  if (n < 1 || dim < 1)
    throw std::invalid_argument("gen_synthetic: need n >= 1 and dim >= 1");
  if (!(noise_sd >= 0.0))
    throw std::invalid_argument("gen_synthetic: noise_sd must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd w_true(dim);
  for (int j = 0; j < dim; ++j) w_true[j] = normal(rng);

  Dataset d;
  d.dim = dim;
  d.rows.reserve(static_cast<std::size_t>(n));
  d.labels.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    std::vector<SparseEntry> row(static_cast<std::size_t>(dim));
    double dot = 0.0;
    for (int j = 0; j < dim; ++j) {
      const double v = normal(rng);
      row[static_cast<std::size_t>(j)] = {j, v};
      dot += v * w_true[j];
    }
    d.rows.push_back(std::move(row));
    d.labels.push_back(dot + noise_sd * normal(rng));
  }
  return d;
}

void RidgeProblem::validate() const {
  data.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("ridge: lambda must be >= 0");
}

ShardSet shard(const Dataset& d, const Allocation& alloc, std::uint64_t seed) {
  d.validate();
  alloc.validate();
  if (alloc.total() != static_cast<long long>(d.n()))
    throw std::invalid_argument("shard: allocation does not cover the dataset");
  ShardSet out;
  out.perm.resize(d.n());
  std::iota(out.perm.begin(), out.perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(out.perm.begin(), out.perm.end(), rng);

  std::size_t pos = 0;
  out.shards.reserve(alloc.b.size());
  for (long long share : alloc.b) {
    Dataset s;
    s.dim = d.dim;
    s.rows.reserve(static_cast<std::size_t>(share));
    for (long long k = 0; k < share; ++k, ++pos) {
      s.rows.push_back(d.rows[out.perm[pos]]);
      s.labels.push_back(d.labels[out.perm[pos]]);
    }
    out.shards.push_back(std::move(s));
  }
  return out;
}

ValueGrad ridge_value_grad(const Dataset& d, double lambda,
                           const Eigen::VectorXd& w) {
  if (d.n() == 0)
    throw std::invalid_argument("ridge_value_grad: empty dataset");
  if (w.size() != d.dim)
    throw std::invalid_argument("ridge_value_grad: dimension mismatch");
  const double inv_n = 1.0 / static_cast<double>(d.n());
  ValueGrad out;
  out.grad = lambda * w;
  out.value = 0.5 * lambda * w.squaredNorm();
  double sq = 0.0;
  for (std::size_t i = 0; i < d.n(); ++i) {
    double r = -d.labels[i];
    for (const auto& e : d.rows[i]) r += e.value * w[e.index];
    sq += r * r;
    const double scale = r * inv_n;
    for (const auto& e : d.rows[i]) out.grad[e.index] += scale * e.value;
  }
  out.value += 0.5 * sq * inv_n;
  return out;
}

Eigen::MatrixXd gram_matrix(const Dataset& d) {
  if (d.n() == 0)
    throw std::invalid_argument("gram_matrix: empty dataset");
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d.dim, d.dim);
  for (const auto& row : d.rows)
    for (const auto& a : row)
      for (const auto& b : row) g(a.index, b.index) += a.value * b.value;
  g /= static_cast<double>(d.n());
  return g;
}

Eigen::VectorXd xty(const Dataset& d) {
  if (d.n() == 0) throw std::invalid_argument("xty: empty dataset");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d.dim);
  for (std::size_t i = 0; i < d.n(); ++i)
    for (const auto& e : d.rows[i]) v[e.index] += e.value * d.labels[i];
  return v / static_cast<double>(d.n());
}

double power_iteration_lmax(const Eigen::MatrixXd& sym, double tol,
                            int max_iters) {
  if (sym.rows() != sym.cols() || sym.rows() == 0)
    throw std::invalid_argument("power_iteration: need a square matrix");
  Eigen::VectorXd v = Eigen::VectorXd::Ones(sym.rows());
  v.normalize();
  double lam = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd w = sym * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;  // start vector is in the null space
    const double next = v.dot(w);
    w /= norm;
    if (it > 0 && std::abs(next - lam) <= tol * std::max(std::abs(next), 1e-300)) {
      return next;
    }
    lam = next;
    v = std::move(w);
  }
  throw std::runtime_error("power_iteration: no convergence within iteration cap");
}

SpectralConstants spectral_constants(const RidgeProblem& p,
                                     bool mu_from_lambda_min) {
  p.validate();
  if (p.data.n() == 0)
    throw std::invalid_argument("spectral_constants: empty dataset");
  const Eigen::MatrixXd g = gram_matrix(p.data);
  const double lmax = power_iteration_lmax(g);
  SpectralConstants out;
  out.L = lmax + p.lambda;
  if (mu_from_lambda_min) {
    // lmin(G) = lmax(G) - lmax(lmax*I - G); the shifted matrix stays PSD
    const Eigen::MatrixXd shifted =
        Eigen::MatrixXd::Identity(g.rows(), g.cols()) * lmax - g;
    const double lmin = std::max(0.0, lmax - power_iteration_lmax(shifted));
    out.mu = lmin + p.lambda;
  } else {
    out.mu = p.lambda;
  }
  if (!(out.mu > 0.0))
    throw std::invalid_argument(
        "spectral_constants: mu is not positive (set lambda > 0 or use the "
        "smallest-eigenvalue option on full-rank data)");
  return out;
}

}  // namespace dsplit
