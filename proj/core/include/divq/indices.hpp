#pragma once

#include <optional>

#include "divq/risk_family.hpp"
#include "divq/sample_matrix.hpp"

namespace divq {

/// Result of the general DQ level inversion: the index value alpha*/alpha
/// together with the inverted level alpha* itself. Values are non-negative
/// extended reals; +inf signals an empty inversion set on an unbounded
/// level domain.
struct DqResult {
  double value = 0.0;
  double alpha_star = 0.0;
};

/// DQ based on the VaR family: the exceedance probability of the scenario
/// sums over the pooled VaR capital, rescaled by 1/alpha. Output lies on the
/// grid k/(N*alpha). Ties with the threshold count as non-exceedance.
double dq_var(const SampleMatrix& x, double alpha,
              const std::optional<Weights>& w = std::nullopt);

/// DQ based on the ES family, computed as the minimum over r > 0 of
/// mean((r*(S - sum_i ES_alpha) + 1)_+) / alpha, zero when no scenario sum
/// exceeds the pooled ES capital.
double dq_es(const SampleMatrix& x, double alpha,
             const std::optional<Weights>& w = std::nullopt);

/// DQ for an arbitrary decreasing risk family, by monotone inversion of
/// beta -> rho_beta(sum) at the pooled capital sum_i rho_alpha(X_i).
/// Throws InvariantError if the family is detected non-monotone while
/// bracketing.
DqResult dq_general(const RiskFamily& family, const SampleMatrix& x, double alpha);

/// Diversification ratio phi(sum) / sum_i phi(X_i), conventions 0/0 = 0 and
/// c/0 = +-inf. May be negative for VaR/ES; not clamped.
double dr(const PhiSpec& phi, const SampleMatrix& x,
          const std::optional<Weights>& w = std::nullopt);

/// Diversification benefit sum_i phi(X_i) - phi(sum). May be negative.
double db(const PhiSpec& phi, const SampleMatrix& x);

struct EssSupMixDq {
  double value = 0.0;
  bool degenerate = false;  // positive numerator over a zero denominator
};

/// DQ of the ess-sup mixture family rho_beta = (1-beta)*ess-sup + beta*phi
/// at level 1: ((max S - sum_i phi(X_i)) / (max S - phi(S)))_+.
EssSupMixDq dq_esssup_mix(const PhiSpec& phi, const SampleMatrix& x);

}  // namespace divq
