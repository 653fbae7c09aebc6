#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace divq {

/// N x n matrix of joint loss observations, row-major: rows are scenarios,
/// columns are assets. Immutable once filled; all entries finite.
class SampleMatrix {
 public:
  SampleMatrix(std::size_t rows, std::size_t cols);
  static SampleMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> data() const { return data_; }

  std::vector<double> column(std::size_t j) const;
  /// Column j scaled by a weight: the sample of w_j * X_j.
  std::vector<double> column_scaled(std::size_t j, double weight) const;
  /// Scenario sums, optionally weighted: S_i = sum_j w_j X_ij.
  std::vector<double> row_sums(std::span<const double> weights = {}) const;

  /// Throws std::invalid_argument if any entry is non-finite.
  void validate() const;

  /// The matrix (X, X): columns duplicated.
  SampleMatrix replicated() const;
  /// The matrix with a constant column appended.
  SampleMatrix with_constant_column(double value) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

/// A point of the simplex: non-negative entries summing to one (1e-12 slack).
class Weights {
 public:
  explicit Weights(std::vector<double> w);
  static Weights uniform(std::size_t n);

  std::span<const double> values() const { return w_; }
  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }

 private:
  std::vector<double> w_;
};

}  // namespace divq
