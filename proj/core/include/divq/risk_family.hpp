#pragma once

#include <limits>
#include <span>
#include <string>

#include "divq/risk_measures.hpp"

namespace divq {

enum class GaussianBase { VaR, ES };

/// A parametric family of risk measures rho = (rho_beta), non-increasing in
/// beta on an interval (0, alpha_bar). Families are small value types; all
/// evaluation is stateless.
class RiskFamily {
 public:
  enum class Kind {
    VaRFamily,         // empirical VaR_beta, I = (0,1)
    ESFamily,          // empirical ES_beta, I = (0,1)
    ScaledPhi,         // phi_+/beta (or b*mean + c*phi/beta), I = (0,inf)
    EssSupMix,         // (1-beta)*max + beta*phi, I = (0,1]
    GaussianAnalytic,  // closed-form VaR/ES of a fixed normal law, I = (0,1)
  };

  static RiskFamily var_family();
  static RiskFamily es_family();
  /// Decreasing family phi_+/beta built from a single risk functional.
  static RiskFamily scaled_phi(PhiSpec phi);
  /// Affine variant b*mean + c*phi/beta (phi not truncated at zero).
  static RiskFamily scaled_phi_affine(PhiSpec phi, double b, double c);
  static RiskFamily esssup_mix(PhiSpec phi);
  static RiskFamily gaussian_analytic(double mean, double sd, GaussianBase base);

  Kind kind() const { return kind_; }
  double alpha_bar() const { return alpha_bar_; }
  bool upper_inclusive() const { return upper_inclusive_; }
  bool contains(double beta) const {
    return beta > 0.0 && (beta < alpha_bar_ || (upper_inclusive_ && beta == alpha_bar_));
  }

  /// rho_beta evaluated on a loss sample. Throws std::domain_error when beta
  /// lies outside the level domain.
  double eval(double beta, std::span<const double> losses) const;
  /// Same on an ascending pre-sorted sample (hot path for level inversion).
  double eval_sorted(double beta, std::span<const double> sorted) const;

  std::string name() const;

 private:
  RiskFamily(Kind kind, double alpha_bar, bool upper_inclusive)
      : kind_(kind), alpha_bar_(alpha_bar), upper_inclusive_(upper_inclusive) {}

  Kind kind_;
  double alpha_bar_;
  bool upper_inclusive_;
  PhiSpec phi_{};
  bool positive_part_ = true;  // ScaledPhi: truncate phi at zero
  double affine_b_ = 0.0;      // ScaledPhi affine variant
  double affine_c_ = 1.0;
  double gauss_mean_ = 0.0;  // GaussianAnalytic parameters
  double gauss_sd_ = 1.0;
  GaussianBase gauss_base_ = GaussianBase::VaR;
};

/// rho_beta(sample); the operation form of RiskFamily::eval.
double family_eval(const RiskFamily& family, double beta, std::span<const double> losses);

}  // namespace divq
