#include "divq/risk_family.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace divq {

RiskFamily RiskFamily::var_family() { return RiskFamily(Kind::VaRFamily, 1.0, false); }

RiskFamily RiskFamily::es_family() { return RiskFamily(Kind::ESFamily, 1.0, false); }

RiskFamily RiskFamily::scaled_phi(PhiSpec phi) {
  RiskFamily f(Kind::ScaledPhi, std::numeric_limits<double>::infinity(), false);
  f.phi_ = phi;
  f.positive_part_ = true;
  return f;
}

RiskFamily RiskFamily::scaled_phi_affine(PhiSpec phi, double b, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("scaled_phi_affine requires c > 0");
  RiskFamily f(Kind::ScaledPhi, std::numeric_limits<double>::infinity(), false);
  f.phi_ = phi;
  f.positive_part_ = false;
  f.affine_b_ = b;
  f.affine_c_ = c;
  return f;
}

RiskFamily RiskFamily::esssup_mix(PhiSpec phi) {
  RiskFamily f(Kind::EssSupMix, 1.0, true);
  f.phi_ = phi;
  return f;
}

RiskFamily RiskFamily::gaussian_analytic(double mean, double sd, GaussianBase base) {
  if (!(sd > 0.0)) throw std::invalid_argument("gaussian_analytic requires sd > 0");
  RiskFamily f(Kind::GaussianAnalytic, 1.0, false);
  f.gauss_mean_ = mean;
  f.gauss_sd_ = sd;
  f.gauss_base_ = base;
  return f;
}

double RiskFamily::eval_sorted(double beta, std::span<const double> sorted) const {
  if (!contains(beta))
    throw std::domain_error("level " + std::to_string(beta) + " outside the family domain of " +
                            name());
  switch (kind_) {
    case Kind::VaRFamily:
      return empirical_var_sorted(sorted, beta);
    case Kind::ESFamily:
      return empirical_es_sorted(sorted, beta);
    case Kind::ScaledPhi: {
      const double phi = eval_phi_sorted(phi_, sorted);
      if (positive_part_) return std::max(phi, 0.0) / beta;
      const double m = std::accumulate(sorted.begin(), sorted.end(), 0.0) /
                       static_cast<double>(sorted.size());
      return affine_b_ * m + affine_c_ * phi / beta;
    }
    case Kind::EssSupMix: {
      if (sorted.empty()) throw std::invalid_argument("empty sample");
      const double phi = eval_phi_sorted(phi_, sorted);
      return (1.0 - beta) * sorted.back() + beta * phi;
    }
    case Kind::GaussianAnalytic:
      return gauss_base_ == GaussianBase::VaR ? normal_var(gauss_mean_, gauss_sd_, beta)
                                              : normal_es(gauss_mean_, gauss_sd_, beta);
  }
  throw std::logic_error("unknown RiskFamily kind");
}

double RiskFamily::eval(double beta, std::span<const double> losses) const {
  if (kind_ == Kind::GaussianAnalytic) return eval_sorted(beta, losses);
  std::vector<double> s(losses.begin(), losses.end());
  std::sort(s.begin(), s.end());
  return eval_sorted(beta, s);
}

std::string RiskFamily::name() const {
  switch (kind_) {
    case Kind::VaRFamily:
      return "VaR family";
    case Kind::ESFamily:
      return "ES family";
    case Kind::ScaledPhi:
      return "scaled-phi family";
    case Kind::EssSupMix:
      return "ess-sup mixture family";
    case Kind::GaussianAnalytic:
      return "Gaussian analytic family";
  }
  return "unknown";
}

double family_eval(const RiskFamily& family, double beta, std::span<const double> losses) {
  return family.eval(beta, losses);
}

}  // namespace divq
