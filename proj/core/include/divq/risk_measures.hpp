#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace divq {

/// A sample of losses: at least one observation, all values finite.
/// Construction validates; the data is immutable afterwards.
class Sample {
 public:
  explicit Sample(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }

 private:
  std::vector<double> values_;
};

enum class VarEstimator {
  Exact,         // left-quantile order statistic x_(ceil(N(1-alpha)))
  Interpolated,  // linear interpolation between neighbouring order statistics
};

/// Value-at-Risk of the empirical law at level alpha in (0,1), small-alpha
/// convention: the left quantile at 1-alpha.
double empirical_var(std::span<const double> losses, double alpha,
                     VarEstimator estimator = VarEstimator::Exact);

/// Expected Shortfall of the empirical law at level alpha in (0,1): the mean
/// of the worst alpha-fraction with fractional weight on the boundary
/// observation. Coincides with the Rockafellar-Uryasev minimum
///   min_t { t + mean((x-t)_+)/alpha }.
double empirical_es(std::span<const double> losses, double alpha);

/// Population (divide-by-N) standard deviation and variance.
std::pair<double, double> sd_and_var(std::span<const double> losses);

/// Same as above for pre-sorted (ascending) data; used on hot paths that
/// evaluate many levels against one sample.
double empirical_var_sorted(std::span<const double> sorted, double alpha,
                            VarEstimator estimator = VarEstimator::Exact);
double empirical_es_sorted(std::span<const double> sorted, double alpha);

/// VaR / ES of a normal law N(mean, sd^2), closed form.
double normal_var(double mean, double sd, double alpha);
double normal_es(double mean, double sd, double alpha);

/// Standard normal cdf / upper tail / quantile, accurate into the far tail.
double std_normal_cdf(double x);
double std_normal_tail(double x);  // P(Z > x)
double std_normal_quantile(double p);
double std_normal_upper_quantile(double q);  // x with P(Z > x) = q
double std_normal_pdf(double x);

/// A single risk functional used as a building block for ratios, benefits
/// and single-measure DQ constructions.
struct PhiSpec {
  enum class Kind { VaR, ES, SD, Variance, Mean, EssSup };
  Kind kind = Kind::ES;
  double level = 0.05;  // for VaR / ES

  static PhiSpec var(double alpha) { return {Kind::VaR, alpha}; }
  static PhiSpec es(double alpha) { return {Kind::ES, alpha}; }
  static PhiSpec sd() { return {Kind::SD, 0.0}; }
  static PhiSpec variance() { return {Kind::Variance, 0.0}; }
  static PhiSpec mean() { return {Kind::Mean, 0.0}; }
  static PhiSpec ess_sup() { return {Kind::EssSup, 0.0}; }
};

double eval_phi(const PhiSpec& phi, std::span<const double> losses);
double eval_phi_sorted(const PhiSpec& phi, std::span<const double> sorted);

}  // namespace divq
