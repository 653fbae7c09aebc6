#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "divq/risk_family.hpp"
#include "divq/sample_matrix.hpp"

namespace divq {

/// Benchmark joint loss models: a Gaussian with arbitrary mean/covariance,
/// n independent t(nu) marginals, and the common-shock t model where one
/// inverse-gamma-rooted factor multiplies a whole standard normal row.
struct ModelSpec {
  enum class Kind { Gaussian, IidT, CommonShockT };

  Kind kind = Kind::Gaussian;
  std::size_t n = 1;
  double nu = 3.0;
  Eigen::VectorXd mean;  // Gaussian only
  Eigen::MatrixXd cov;   // Gaussian only
  std::uint64_t seed = 0;

  static ModelSpec gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov, std::uint64_t seed);
  static ModelSpec standard_gaussian(std::size_t n, std::uint64_t seed);
  static ModelSpec iid_t(double nu, std::size_t n, std::uint64_t seed);
  static ModelSpec common_shock_t(double nu, std::size_t n, std::uint64_t seed);

  std::string label() const;
};

/// Deterministic block generator behind both the in-memory sampler and the
/// streaming table runner. Blocks own disjoint seed ranges, so any subset of
/// blocks can be (re)generated in any order or on any number of threads with
/// bit-identical content.
class ModelSampler {
 public:
  static constexpr std::size_t kBlockRows = 100000;

  explicit ModelSampler(ModelSpec spec);

  std::size_t n() const { return spec_.n; }
  const ModelSpec& spec() const { return spec_; }

  /// Fills `rows` x n row-major values for the given block index.
  void generate_block(std::size_t block_index, std::size_t rows, double* out) const;

  static std::size_t block_count(std::size_t total_rows) {
    return (total_rows + kBlockRows - 1) / kBlockRows;
  }
  static std::size_t rows_in_block(std::size_t block_index, std::size_t total_rows) {
    const std::size_t start = block_index * kBlockRows;
    return std::min(kBlockRows, total_rows - start);
  }

 private:
  ModelSpec spec_;
  Eigen::MatrixXd transform_;  // factor T with T T^T = cov
  bool identity_transform_ = false;
};

/// Materialized N x n sample; equals the concatenated streamed blocks.
SampleMatrix sample_model(const ModelSpec& spec, std::size_t num_rows);

/// Closed-form DQ of the iid standard normal model N(0, I_n): inverts the
/// analytic VaR/ES curve of the sum at the pooled marginal capital.
double gaussian_dq_oracle(std::size_t n, double alpha, GaussianBase base);

/// One row of the simulation tables.
struct TableRow {
  std::string label;
  double dq_var = 0.0;
  double dq_es = 0.0;
  double dr_var = 0.0;
  double dr_es = 0.0;
  double dr_sd = 0.0;
  double dr_variance = 0.0;
};

/// Index estimates for one model from a two-pass streamed Monte Carlo run;
/// memory stays O(block + N*alpha) regardless of the sample count.
TableRow monte_carlo_row(const ModelSpec& spec, std::size_t num_samples, double alpha);

/// The three-row table (normal / iid-t / common-shock-t) at one (alpha, n,
/// nu). The normal row reports oracle DQs and Monte Carlo DRs.
std::vector<TableRow> reproduce_table(double alpha, std::size_t n, double nu,
                                      std::size_t num_samples, std::uint64_t seed);

}  // namespace divq
