#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsplit/model.hpp"

namespace dsplit {

struct SparseEntry {
  int index;  // 0-based feature index
  double value;
};

// Sparse row-major design matrix with labels. dim is the feature count; rows
// may be empty (all-zero sample).
struct Dataset {
  std::vector<std::vector<SparseEntry>> rows;
  std::vector<double> labels;
  int dim = 0;

  std::size_t n() const { return rows.size(); }
  void validate() const;
};

struct ParseError : std::runtime_error {
  std::size_t line;
  ParseError(std::size_t line_, const std::string& what_);
};

// Text format: one sample per line, "label idx:val idx:val ...", indices
// 1-based and strictly increasing within a line. '#' starts a comment, blank
// lines are skipped. Malformed input raises ParseError with the line number.
Dataset parse_libsvm(std::istream& is);
Dataset parse_libsvm_file(const std::string& path);
void write_libsvm(const Dataset& d, std::ostream& os);

// Dense Gaussian features (unit variance entries), labels y = X*w_true +
// noise_sd * standard normal. Deterministic in seed.
Dataset gen_synthetic(long long n, int dim, double noise_sd, std::uint64_t seed);

struct RidgeProblem {
  Dataset data;
  double lambda = 0.0;  // f(w) = ||Xw - y||^2 / (2n) + lambda/2 ||w||^2

  void validate() const;
};

// Shards produced by a seeded shuffle followed by a contiguous split; shard i
// receives alloc.b[i] rows, the server shard comes first.
struct ShardSet {
  std::vector<Dataset> shards;
  std::vector<std::size_t> perm;  // row order used for the split
};

ShardSet shard(const Dataset& d, const Allocation& alloc, std::uint64_t seed);

struct ValueGrad {
  double value;
  Eigen::VectorXd grad;
};

// Value and gradient of the per-shard ridge objective
// ||Xw - y||^2 / (2b) + lambda/2 ||w||^2 on a nonempty dataset.
ValueGrad ridge_value_grad(const Dataset& d, double lambda,
                           const Eigen::VectorXd& w);

Eigen::MatrixXd gram_matrix(const Dataset& d);  // X^T X / n
Eigen::VectorXd xty(const Dataset& d);          // X^T y / n

// Dominant eigenvalue of a symmetric PSD matrix by power iteration.
// Relative tolerance 1e-8 on the eigenvalue, at most 10000 iterations;
// non-convergence is an error.
double power_iteration_lmax(const Eigen::MatrixXd& sym, double tol = 1e-8,
                            int max_iters = 10000);

struct SpectralConstants {
  double L;
  double mu;
};

// L = lmax(X^T X / n) + lambda. mu = lambda by default; with
// mu_from_lambda_min, mu = lmin(X^T X / n) + lambda instead. mu must come out
// positive.
SpectralConstants spectral_constants(const RidgeProblem& p,
                                     bool mu_from_lambda_min = false);

}  // namespace dsplit
