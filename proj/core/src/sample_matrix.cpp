#include "divq/sample_matrix.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace divq {

SampleMatrix::SampleMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
  if (rows == 0 || cols == 0)
    throw std::invalid_argument("SampleMatrix requires at least one row and one column");
}

SampleMatrix SampleMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw std::invalid_argument("SampleMatrix requires at least one row");
  SampleMatrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols_)
      throw std::invalid_argument("ragged rows in SampleMatrix::from_rows");
    for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
  }
  m.validate();
  return m;
}

std::vector<double> SampleMatrix::column(std::size_t j) const {
  std::vector<double> c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

std::vector<double> SampleMatrix::column_scaled(std::size_t j, double weight) const {
  std::vector<double> c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = weight * (*this)(i, j);
  return c;
}

std::vector<double> SampleMatrix::row_sums(std::span<const double> weights) const {
  if (!weights.empty() && weights.size() != cols_)
    throw std::invalid_argument("weight length does not match the number of assets");
  std::vector<double> s(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* r = data_.data() + i * cols_;
    double acc = 0.0;
    if (weights.empty()) {
      for (std::size_t j = 0; j < cols_; ++j) acc += r[j];
    } else {
      for (std::size_t j = 0; j < cols_; ++j) acc += weights[j] * r[j];
    }
    s[i] = acc;
  }
  return s;
}

void SampleMatrix::validate() const {
  for (double v : data_)
    if (!std::isfinite(v)) throw std::invalid_argument("SampleMatrix entries must be finite");
}

SampleMatrix SampleMatrix::replicated() const {
  SampleMatrix m(rows_, 2 * cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) {
      m(i, j) = (*this)(i, j);
      m(i, cols_ + j) = (*this)(i, j);
    }
  return m;
}

SampleMatrix SampleMatrix::with_constant_column(double value) const {
  SampleMatrix m(rows_, cols_ + 1);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j);
    m(i, cols_) = value;
  }
  return m;
}

Weights::Weights(std::vector<double> w) : w_(std::move(w)) {
  if (w_.empty()) throw std::invalid_argument("Weights require at least one asset");
  double sum = 0.0;
  for (double x : w_) {
    if (!(x >= 0.0)) throw std::invalid_argument("weights must be non-negative");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("weights must sum to one, got " + std::to_string(sum));
}

Weights Weights::uniform(std::size_t n) {
  if (n == 0) throw std::invalid_argument("Weights require at least one asset");
  return Weights(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

}  // namespace divq
