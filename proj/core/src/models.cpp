#include "divq/models.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <limits>
#include <mutex>
#include <random>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "divq/errors.hpp"
#include "divq/parallel.hpp"

namespace divq {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::uint64_t stream_tag(ModelSpec::Kind kind) {
  switch (kind) {
    case ModelSpec::Kind::Gaussian:
      return 0x67617573ULL;
    case ModelSpec::Kind::IidT:
      return 0x69696474ULL;
    case ModelSpec::Kind::CommonShockT:
      return 0x636f6d74ULL;
  }
  return 0;
}

/// Retains the K largest values of a stream. Values at or below the current
/// K-th largest may be discarded early; the final multiset of the top K is
/// exact and independent of the push order.
class TopTail {
 public:
  explicit TopTail(std::size_t k) : k_(std::max<std::size_t>(k, 1)) { buf_.reserve(2 * k_); }

  double cutoff() const { return cutoff_; }

  void add(double x) {
    if (x <= cutoff_) return;
    buf_.push_back(x);
    if (buf_.size() >= 2 * k_) compact();
  }

  std::vector<double> finalize() {
    if (buf_.size() > k_) compact();
    std::sort(buf_.begin(), buf_.end(), std::greater<double>());
    return buf_;
  }

 private:
  void compact() {
    if (buf_.size() <= k_) return;
    std::nth_element(buf_.begin(), buf_.begin() + (k_ - 1), buf_.end(), std::greater<double>());
    cutoff_ = buf_[k_ - 1];
    buf_.resize(k_);
  }

  std::size_t k_;
  std::vector<double> buf_;
  double cutoff_ = kNegInf;
};

/// Thread-safe facade: workers filter against a relaxed cutoff snapshot and
/// push surviving candidates under the lock.
class SharedTail {
 public:
  explicit SharedTail(std::size_t k) : tail_(k) {}

  void offer(const double* values, std::size_t count, std::size_t stride) {
    const double snapshot = cutoff_.load(std::memory_order_relaxed);
    scratch_local().clear();
    auto& cand = scratch_local();
    for (std::size_t i = 0; i < count; ++i) {
      const double v = values[i * stride];
      if (v > snapshot) cand.push_back(v);
    }
    if (cand.empty()) return;
    std::lock_guard<std::mutex> lock(mutex_);
    for (double v : cand) tail_.add(v);
    cutoff_.store(tail_.cutoff(), std::memory_order_relaxed);
  }

  std::vector<double> finalize() {
    std::lock_guard<std::mutex> lock(mutex_);
    return tail_.finalize();
  }

 private:
  static std::vector<double>& scratch_local() {
    thread_local std::vector<double> scratch;
    return scratch;
  }

  TopTail tail_;
  std::mutex mutex_;
  std::atomic<double> cutoff_{kNegInf};
};

struct MomentAcc {
  double count = 0.0;
  double sum = 0.0;
  double sumsq = 0.0;

  void add(double x) {
    count += 1.0;
    sum += x;
    sumsq += x * x;
  }
  void merge(const MomentAcc& o) {
    count += o.count;
    sum += o.sum;
    sumsq += o.sumsq;
  }
  double variance() const {
    if (count <= 0.0) return 0.0;
    const double mean = sum / count;
    return std::max(0.0, sumsq / count - mean * mean);
  }
  double sd() const { return std::sqrt(variance()); }
};

// Mirrors empirical_var_sorted on a descending tail of the full sample.
double tail_var(const std::vector<double>& desc, std::size_t total, double alpha) {
  auto k = static_cast<std::size_t>(std::ceil(static_cast<double>(total) * (1.0 - alpha)));
  k = std::clamp<std::size_t>(k, 1, total);
  const std::size_t idx = total - k;
  if (idx >= desc.size()) throw std::logic_error("tail too short for VaR level");
  return desc[idx];
}

// Mirrors empirical_es_sorted on a descending tail.
double tail_es(const std::vector<double>& desc, std::size_t total, double alpha) {
  const double na = static_cast<double>(total) * alpha;
  auto m = static_cast<std::size_t>(std::floor(na));
  if (m >= total) m = total - 1;
  if (m >= desc.size()) throw std::logic_error("tail too short for ES level");
  const double frac = na - static_cast<double>(m);
  double acc = 0.0;
  for (std::size_t j = 0; j < m; ++j) acc += desc[j];
  acc += frac * desc[m];
  return acc / na;
}

// Smallest beta with ES_beta <= target on the empirical law of the tail's
// sample; exact inversion of the piecewise ES curve. Requires the crossing
// to lie within the retained tail.
double tail_es_inverse(const std::vector<double>& desc, std::size_t total, double target) {
  if (desc.empty()) throw std::logic_error("empty tail");
  if (desc[0] <= target) return 0.0;
  const double n = static_cast<double>(total);
  double prefix = 0.0;  // sum of the m largest values
  for (std::size_t m = 1; m <= desc.size(); ++m) {
    prefix += desc[m - 1];
    if (prefix / static_cast<double>(m) <= target) {
      // Crossing in beta-segment ((m-1)/n, m/n]: solve the linear equation.
      const double top = desc[m - 1];
      const double lhs = (prefix - top) - static_cast<double>(m - 1) * top;
      const double beta = lhs / (n * (target - top));
      return std::clamp(beta, static_cast<double>(m - 1) / n, static_cast<double>(m) / n);
    }
  }
  if (desc.size() >= total) return 1.0;  // never reaches the target: inf(empty) = 1
  throw std::logic_error("tail too short for ES inversion");
}

double ratio_with_conventions(double num, double den) {
  if (den == 0.0)
    return num == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), num);
  return num / den;
}

}  // namespace

ModelSpec ModelSpec::gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov, std::uint64_t seed) {
  ModelSpec s;
  s.kind = Kind::Gaussian;
  s.n = static_cast<std::size_t>(mean.size());
  s.mean = std::move(mean);
  s.cov = std::move(cov);
  s.seed = seed;
  if (s.n == 0) throw std::invalid_argument("model dimension must be at least 1");
  if (s.cov.rows() != s.cov.cols() || static_cast<std::size_t>(s.cov.rows()) != s.n)
    throw std::invalid_argument("covariance dimensions do not match the mean vector");
  return s;
}

ModelSpec ModelSpec::standard_gaussian(std::size_t n, std::uint64_t seed) {
  return gaussian(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)),
                  Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n)),
                  seed);
}

ModelSpec ModelSpec::iid_t(double nu, std::size_t n, std::uint64_t seed) {
  if (!(nu > 0.0)) throw std::invalid_argument("degrees of freedom must be positive");
  if (n == 0) throw std::invalid_argument("model dimension must be at least 1");
  ModelSpec s;
  s.kind = Kind::IidT;
  s.n = n;
  s.nu = nu;
  s.seed = seed;
  return s;
}

ModelSpec ModelSpec::common_shock_t(double nu, std::size_t n, std::uint64_t seed) {
  ModelSpec s = iid_t(nu, n, seed);
  s.kind = Kind::CommonShockT;
  return s;
}

std::string ModelSpec::label() const {
  switch (kind) {
    case Kind::Gaussian:
      return "normal";
    case Kind::IidT:
      return "iid-t";
    case Kind::CommonShockT:
      return "common-shock-t";
  }
  return "unknown";
}

ModelSampler::ModelSampler(ModelSpec spec) : spec_(std::move(spec)) {
  if (spec_.kind != ModelSpec::Kind::Gaussian) return;
  const auto dim = static_cast<Eigen::Index>(spec_.n);
  if (spec_.cov.isApprox(Eigen::MatrixXd::Identity(dim, dim))) {
    identity_transform_ = true;
    return;
  }
  if ((spec_.cov - spec_.cov.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw DegeneracyError("covariance matrix is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(spec_.cov);
  if (llt.info() == Eigen::Success) {
    transform_ = llt.matrixL();
    return;
  }
  // Semidefinite case: factor through the spectral decomposition.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(spec_.cov);
  const double max_eig = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, max_eig))
    throw DegeneracyError("covariance matrix is not positive semidefinite");
  transform_ = eig.eigenvectors() *
               eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

void ModelSampler::generate_block(std::size_t block_index, std::size_t rows, double* out) const {
  const std::size_t n = spec_.n;
  std::mt19937_64 engine(derive_seed(spec_.seed, stream_tag(spec_.kind), block_index));
  std::normal_distribution<double> normal;
  std::gamma_distribution<double> chi2(spec_.nu / 2.0, 2.0);

  switch (spec_.kind) {
    case ModelSpec::Kind::Gaussian: {
      Eigen::VectorXd z(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < rows; ++i) {
        double* row = out + i * n;
        for (std::size_t j = 0; j < n; ++j) z[static_cast<Eigen::Index>(j)] = normal(engine);
        if (identity_transform_) {
          for (std::size_t j = 0; j < n; ++j) row[j] = z[static_cast<Eigen::Index>(j)];
        } else {
          Eigen::VectorXd x = spec_.mean + transform_ * z;
          for (std::size_t j = 0; j < n; ++j) row[j] = x[static_cast<Eigen::Index>(j)];
        }
      }
      break;
    }
    case ModelSpec::Kind::IidT: {
      for (std::size_t i = 0; i < rows; ++i) {
        double* row = out + i * n;
        for (std::size_t j = 0; j < n; ++j) row[j] = normal(engine);
        for (std::size_t j = 0; j < n; ++j) row[j] *= std::sqrt(spec_.nu / chi2(engine));
      }
      break;
    }
    case ModelSpec::Kind::CommonShockT: {
      for (std::size_t i = 0; i < rows; ++i) {
        double* row = out + i * n;
        for (std::size_t j = 0; j < n; ++j) row[j] = normal(engine);
        const double xi = std::sqrt(spec_.nu / chi2(engine));
        for (std::size_t j = 0; j < n; ++j) row[j] *= xi;
      }
      break;
    }
  }
}

SampleMatrix sample_model(const ModelSpec& spec, std::size_t num_rows) {
  if (num_rows == 0) throw std::invalid_argument("sample size must be at least 1");
  ModelSampler sampler(spec);
  SampleMatrix m(num_rows, spec.n);
  const std::size_t blocks = ModelSampler::block_count(num_rows);
  parallel_for_index(blocks, [&](std::size_t b) {
    const std::size_t rows = ModelSampler::rows_in_block(b, num_rows);
    double* out = m.row(b * ModelSampler::kBlockRows).data();
    sampler.generate_block(b, rows, out);
  });
  return m;
}

double gaussian_dq_oracle(std::size_t n, double alpha, GaussianBase base) {
  if (n == 0) throw std::invalid_argument("dimension must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0,1)");
  const double sqn = std::sqrt(static_cast<double>(n));
  if (base == GaussianBase::VaR) {
    const double z = std_normal_upper_quantile(alpha);
    const double alpha_star = std_normal_tail(sqn * z);
    return alpha_star / alpha;
  }
  // ES: invert beta -> ES_beta(N(0, n)) at n * ES_alpha(N(0,1)).
  const double target = static_cast<double>(n) * normal_es(0.0, 1.0, alpha);
  auto curve = [sqn](double beta) { return normal_es(0.0, sqn, beta); };
  double lo = std::numeric_limits<double>::min();
  double hi = 1.0 - 1e-16;
  if (curve(hi) > target) return 1.0 / alpha;  // no crossing below 1
  for (int it = 0; it < 2000 && (hi - lo) > 1e-15 * hi; ++it) {
    const double mid = std::sqrt(lo * hi);
    (curve(mid) <= target ? hi : lo) = mid;
  }
  return hi / alpha;
}

TableRow monte_carlo_row(const ModelSpec& spec, std::size_t num_samples, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0,1)");
  if (num_samples == 0) throw std::invalid_argument("sample size must be at least 1");
  const std::size_t n = spec.n;
  const std::size_t total = num_samples;
  ModelSampler sampler(spec);
  const std::size_t blocks = ModelSampler::block_count(total);
  const auto tail_len = std::min<std::size_t>(
      total, static_cast<std::size_t>(std::floor(static_cast<double>(total) * alpha)) + 3);

  // Pass 1: marginal tails and moments.
  std::deque<SharedTail> col_tails;
  for (std::size_t j = 0; j < n; ++j) col_tails.emplace_back(tail_len);
  std::vector<std::vector<MomentAcc>> block_moments(blocks, std::vector<MomentAcc>(n));

  parallel_for_index(blocks, [&](std::size_t b) {
    const std::size_t rows = ModelSampler::rows_in_block(b, total);
    std::vector<double> buf(rows * n);
    sampler.generate_block(b, rows, buf.data());
    for (std::size_t j = 0; j < n; ++j) {
      auto& acc = block_moments[b][j];
      for (std::size_t i = 0; i < rows; ++i) acc.add(buf[i * n + j]);
      col_tails[j].offer(buf.data() + j, rows, n);
    }
  });

  std::vector<MomentAcc> col_moments(n);
  for (std::size_t b = 0; b < blocks; ++b)
    for (std::size_t j = 0; j < n; ++j) col_moments[j].merge(block_moments[b][j]);

  double pooled_var = 0.0, pooled_es = 0.0, pooled_sd = 0.0, pooled_variance = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    auto desc = col_tails[j].finalize();
    pooled_var += tail_var(desc, total, alpha);
    pooled_es += tail_es(desc, total, alpha);
    pooled_sd += col_moments[j].sd();
    pooled_variance += col_moments[j].variance();
  }

  // Pass 2: scenario sums against the pooled capital.
  SharedTail sum_tail(tail_len);
  std::vector<std::size_t> block_exceed(blocks, 0);
  std::vector<MomentAcc> block_sum_moments(blocks);

  parallel_for_index(blocks, [&](std::size_t b) {
    const std::size_t rows = ModelSampler::rows_in_block(b, total);
    std::vector<double> buf(rows * n);
    sampler.generate_block(b, rows, buf.data());
    std::vector<double> sums(rows);
    std::size_t exceed = 0;
    auto& acc = block_sum_moments[b];
    for (std::size_t i = 0; i < rows; ++i) {
      double s = 0.0;
      const double* row = buf.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) s += row[j];
      sums[i] = s;
      acc.add(s);
      if (s > pooled_var) ++exceed;
    }
    block_exceed[b] = exceed;
    sum_tail.offer(sums.data(), rows, 1);
  });

  std::size_t exceed_total = 0;
  MomentAcc sum_moments;
  for (std::size_t b = 0; b < blocks; ++b) {
    exceed_total += block_exceed[b];
    sum_moments.merge(block_sum_moments[b]);
  }
  auto sum_desc = sum_tail.finalize();

  TableRow row;
  row.label = spec.label();
  row.dq_var =
      static_cast<double>(exceed_total) / (static_cast<double>(total) * alpha);
  row.dq_es = tail_es_inverse(sum_desc, total, pooled_es) / alpha;
  row.dr_var = ratio_with_conventions(tail_var(sum_desc, total, alpha), pooled_var);
  row.dr_es = ratio_with_conventions(tail_es(sum_desc, total, alpha), pooled_es);
  row.dr_sd = ratio_with_conventions(sum_moments.sd(), pooled_sd);
  row.dr_variance = ratio_with_conventions(sum_moments.variance(), pooled_variance);
  return row;
}

std::vector<TableRow> reproduce_table(double alpha, std::size_t n, double nu,
                                      std::size_t num_samples, std::uint64_t seed) {
  if (static_cast<double>(num_samples) * alpha < 100.0)
    throw std::invalid_argument("sample size too small for the requested level");

  std::uint64_t state = seed;
  const std::uint64_t seed_normal = splitmix64(state);
  const std::uint64_t seed_iid = splitmix64(state);
  const std::uint64_t seed_shock = splitmix64(state);

  std::vector<TableRow> rows;
  rows.reserve(3);

  TableRow normal_row =
      monte_carlo_row(ModelSpec::standard_gaussian(n, seed_normal), num_samples, alpha);
  normal_row.dq_var = gaussian_dq_oracle(n, alpha, GaussianBase::VaR);
  normal_row.dq_es = gaussian_dq_oracle(n, alpha, GaussianBase::ES);
  rows.push_back(std::move(normal_row));

  rows.push_back(monte_carlo_row(ModelSpec::iid_t(nu, n, seed_iid), num_samples, alpha));
  rows.push_back(
      monte_carlo_row(ModelSpec::common_shock_t(nu, n, seed_shock), num_samples, alpha));
  return rows;
}

}  // namespace divq
