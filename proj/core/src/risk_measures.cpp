#include "divq/risk_measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace divq {

namespace {

void check_level(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("risk level must lie in (0,1), got " + std::to_string(alpha));
}

std::vector<double> sorted_copy(std::span<const double> losses) {
  std::vector<double> s(losses.begin(), losses.end());
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

Sample::Sample(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw std::invalid_argument("Sample requires at least one observation");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("Sample values must be finite");
}

double empirical_var_sorted(std::span<const double> sorted, double alpha,
                            VarEstimator estimator) {
  check_level(alpha);
  if (sorted.empty()) throw std::invalid_argument("empty sample");
  const std::size_t n = sorted.size();
  if (estimator == VarEstimator::Interpolated) {
    // Quantile at 1-alpha with linear interpolation between order statistics.
    double h = (static_cast<double>(n) - 1.0) * (1.0 - alpha);
    auto lo = static_cast<std::size_t>(h);
    if (lo >= n - 1) return sorted[n - 1];
    double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
  }
  // k = ceil(N(1-alpha)), 1-based into the ascending sort.
  auto k = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * (1.0 - alpha)));
  k = std::clamp<std::size_t>(k, 1, n);
  return sorted[k - 1];
}

double empirical_var(std::span<const double> losses, double alpha, VarEstimator estimator) {
  auto s = sorted_copy(losses);
  return empirical_var_sorted(s, alpha, estimator);
}

double empirical_es_sorted(std::span<const double> sorted, double alpha) {
  check_level(alpha);
  if (sorted.empty()) throw std::invalid_argument("empty sample");
  const std::size_t n = sorted.size();
  const double na = static_cast<double>(n) * alpha;
  // m full tail observations plus a fractional weight on the next one.
  auto m = static_cast<std::size_t>(std::floor(na));
  if (m >= n) m = n - 1;
  const double frac = na - static_cast<double>(m);
  double acc = 0.0;
  for (std::size_t j = 0; j < m; ++j) acc += sorted[n - 1 - j];
  acc += frac * sorted[n - 1 - m];
  return acc / na;
}

double empirical_es(std::span<const double> losses, double alpha) {
  auto s = sorted_copy(losses);
  return empirical_es_sorted(s, alpha);
}

std::pair<double, double> sd_and_var(std::span<const double> losses) {
  if (losses.empty()) throw std::invalid_argument("empty sample");
  const double n = static_cast<double>(losses.size());
  const double mean = std::accumulate(losses.begin(), losses.end(), 0.0) / n;
  double acc = 0.0;
  for (double v : losses) {
    const double d = v - mean;
    acc += d * d;
  }
  const double var = acc / n;
  return {std::sqrt(var), var};
}

double std_normal_pdf(double x) {
  static const double inv_sqrt_2pi = 0.39894228040143267794;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double std_normal_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("quantile argument must lie in (0,1)");
  boost::math::normal_distribution<double> dist;
  return boost::math::quantile(dist, p);
}

double std_normal_upper_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::domain_error("quantile argument must lie in (0,1)");
  boost::math::normal_distribution<double> dist;
  return boost::math::quantile(boost::math::complement(dist, q));
}

double normal_var(double mean, double sd, double alpha) {
  check_level(alpha);
  return mean + sd * std_normal_upper_quantile(alpha);
}

double normal_es(double mean, double sd, double alpha) {
  check_level(alpha);
  const double z = std_normal_upper_quantile(alpha);
  return mean + sd * std_normal_pdf(z) / alpha;
}

double eval_phi_sorted(const PhiSpec& phi, std::span<const double> sorted) {
  switch (phi.kind) {
    case PhiSpec::Kind::VaR:
      return empirical_var_sorted(sorted, phi.level);
    case PhiSpec::Kind::ES:
      return empirical_es_sorted(sorted, phi.level);
    case PhiSpec::Kind::SD:
      return sd_and_var(sorted).first;
    case PhiSpec::Kind::Variance:
      return sd_and_var(sorted).second;
    case PhiSpec::Kind::Mean: {
      if (sorted.empty()) throw std::invalid_argument("empty sample");
      return std::accumulate(sorted.begin(), sorted.end(), 0.0) /
             static_cast<double>(sorted.size());
    }
    case PhiSpec::Kind::EssSup:
      if (sorted.empty()) throw std::invalid_argument("empty sample");
      return sorted.back();
  }
  throw std::logic_error("unknown PhiSpec kind");
}

double eval_phi(const PhiSpec& phi, std::span<const double> losses) {
  switch (phi.kind) {
    case PhiSpec::Kind::SD:
      return sd_and_var(losses).first;
    case PhiSpec::Kind::Variance:
      return sd_and_var(losses).second;
    case PhiSpec::Kind::Mean:
      if (losses.empty()) throw std::invalid_argument("empty sample");
      return std::accumulate(losses.begin(), losses.end(), 0.0) /
             static_cast<double>(losses.size());
    case PhiSpec::Kind::EssSup:
      if (losses.empty()) throw std::invalid_argument("empty sample");
      return *std::max_element(losses.begin(), losses.end());
    default: {
      auto s = sorted_copy(losses);
      return eval_phi_sorted(phi, s);
    }
  }
}

}  // namespace divq
