#include "divq/indices.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "divq/errors.hpp"

namespace divq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_level(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("index level must lie in (0,1), got " + std::to_string(alpha));
}

std::span<const double> weight_span(const std::optional<Weights>& w, std::size_t n) {
  if (!w) return {};
  if (w->size() != n)
    throw std::invalid_argument("weight length does not match the number of assets");
  return w->values();
}

// sum_i phi(w_i X_i); phi applied to the scaled column, not scaled afterwards,
// so non-homogeneous functionals stay correct.
double pooled_capital(const PhiSpec& phi, const SampleMatrix& x, std::span<const double> w) {
  double acc = 0.0;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    auto col = w.empty() ? x.column(j) : x.column_scaled(j, w[j]);
    acc += eval_phi(phi, col);
  }
  return acc;
}

// Minimum over r > 0 of mean((r*d + 1)_+) by golden-section on log r.
// The gaps are pre-scaled by a power of two so that the fixed bracket
// [1e-12, 1e12] is expressed in canonical units; the division is exact and
// the minimum value is invariant under the reparametrization.
double min_exceedance_objective(std::vector<double> gaps) {
  double max_abs = 0.0;
  for (double d : gaps) max_abs = std::max(max_abs, std::abs(d));
  const double scale = std::exp2(std::ceil(std::log2(max_abs)));
  for (double& d : gaps) d /= scale;

  auto objective = [&gaps](double log_r) {
    const double r = std::exp(log_r);
    double acc = 0.0;
    for (double d : gaps) {
      const double v = r * d + 1.0;
      if (v > 0.0) acc += v;
    }
    return acc / static_cast<double>(gaps.size());
  };

  double a = std::log(1e-12);
  double b = std::log(1e12);
  const double inv_phi = 0.6180339887498949;  // (sqrt(5)-1)/2
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = objective(x1);
  double f2 = objective(x2);
  for (int it = 0; it < 120 && (b - a) > 1e-12; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = objective(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = objective(x2);
    }
  }
  double best = std::min(f1, f2);

  // The objective is piecewise linear in r with kinks at r = -1/d, so the
  // minimum sits on a kink (or a flat segment at the same value). Checking
  // the kinks inside the final bracket removes the line-search tolerance.
  const double r_lo = std::exp(a - 1e-9);
  const double r_hi = std::exp(b + 1e-9);
  for (double d : gaps) {
    if (d < 0.0) {
      const double r = -1.0 / d;
      if (r >= r_lo && r <= r_hi) best = std::min(best, objective(std::log(r)));
    }
  }
  return best;
}

}  // namespace

double dq_var(const SampleMatrix& x, double alpha, const std::optional<Weights>& w) {
  check_level(alpha);
  auto ws = weight_span(w, x.cols());
  const double threshold = pooled_capital(PhiSpec::var(alpha), x, ws);
  const auto sums = x.row_sums(ws);
  std::size_t count = 0;
  for (double s : sums)
    if (s > threshold) ++count;
  return static_cast<double>(count) / (static_cast<double>(x.rows()) * alpha);
}

double dq_es(const SampleMatrix& x, double alpha, const std::optional<Weights>& w) {
  check_level(alpha);
  auto ws = weight_span(w, x.cols());
  const double pooled = pooled_capital(PhiSpec::es(alpha), x, ws);
  const auto sums = x.row_sums(ws);
  std::vector<double> gaps(sums.size());
  bool exceeds = false;
  for (std::size_t i = 0; i < sums.size(); ++i) {
    gaps[i] = sums[i] - pooled;
    exceeds = exceeds || gaps[i] > 0.0;
  }
  if (!exceeds) return 0.0;
  return min_exceedance_objective(std::move(gaps)) / alpha;
}

DqResult dq_general(const RiskFamily& family, const SampleMatrix& x, double alpha) {
  if (!family.contains(alpha))
    throw std::domain_error("level " + std::to_string(alpha) +
                            " outside the level domain of the " + family.name());

  double target = 0.0;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    auto col = x.column(j);
    target += family.eval(alpha, col);
  }

  auto sums = x.row_sums();
  std::sort(sums.begin(), sums.end());
  auto curve = [&](double beta) { return family.eval_sorted(beta, sums); };

  auto check_monotone = [&](double beta_lo, double f_lo, double beta_hi, double f_hi) {
    const double tol = 1e-9 * (1.0 + std::abs(f_lo) + std::abs(f_hi));
    if (beta_lo < beta_hi && f_lo < f_hi - tol)
      throw InvariantError("risk family is not non-increasing in its level near beta=" +
                           std::to_string(beta_hi));
  };

  const double alpha_bar = family.alpha_bar();
  const bool unbounded = std::isinf(alpha_bar);

  // Lower-limit value of the curve; decides the alpha* = 0 branch.
  const double beta_tiny = 1e-300;
  const double f_tiny = curve(beta_tiny);
  if (f_tiny <= target) return {0.0, 0.0};

  // Bracket [lo, hi] with curve(lo) > target >= curve(hi), expanding from alpha.
  double lo, hi, f_lo, f_hi;
  const double f_alpha = curve(alpha);
  check_monotone(beta_tiny, f_tiny, alpha, f_alpha);
  if (f_alpha <= target) {
    hi = alpha;
    f_hi = f_alpha;
    lo = alpha;
    f_lo = f_alpha;
    while (f_lo <= target) {
      hi = lo;
      f_hi = f_lo;
      lo *= 0.5;
      if (lo < beta_tiny) return {0.0, 0.0};
      f_lo = curve(lo);
      check_monotone(lo, f_lo, hi, f_hi);
    }
  } else {
    lo = alpha;
    f_lo = f_alpha;
    hi = alpha;
    f_hi = f_alpha;
    const double cap = 1e15;  // beyond this an unbounded family counts as empty
    while (true) {
      double next;
      if (unbounded) {
        next = lo * 2.0;
        if (next > cap) return {kInf, kInf};
      } else {
        next = alpha_bar - (alpha_bar - lo) * 0.5;
        const bool exhausted = (alpha_bar - next) < 1e-16 * alpha_bar;
        if (exhausted) {
          if (family.upper_inclusive() && curve(alpha_bar) <= target) {
            next = alpha_bar;
          } else {
            return {alpha_bar / alpha, alpha_bar};  // empty set: inf(empty) = alpha_bar
          }
        }
      }
      const double f_next = curve(next);
      check_monotone(lo, f_lo, next, f_next);
      if (f_next <= target) {
        hi = next;
        f_hi = f_next;
        break;
      }
      lo = next;
      f_lo = f_next;
    }
  }

  // Log-space bisection down to 1e-13 relative width; tight enough that the
  // scaled-phi inversion reproduces the plain ratio to 1e-12.
  for (int it = 0; it < 400 && (hi - lo) > 1e-13 * hi + 1e-300; ++it) {
    const double mid = std::sqrt(lo * hi);
    const double f_mid = curve(mid);
    check_monotone(lo, f_lo, mid, f_mid);
    check_monotone(mid, f_mid, hi, f_hi);
    if (f_mid <= target) {
      hi = mid;
      f_hi = f_mid;
    } else {
      lo = mid;
      f_lo = f_mid;
    }
  }
  return {hi / alpha, hi};
}

double dr(const PhiSpec& phi, const SampleMatrix& x, const std::optional<Weights>& w) {
  auto ws = weight_span(w, x.cols());
  const auto sums = x.row_sums(ws);
  const double num = eval_phi(phi, sums);
  const double den = pooled_capital(phi, x, ws);
  if (den == 0.0) return num == 0.0 ? 0.0 : std::copysign(kInf, num);
  return num / den;
}

double db(const PhiSpec& phi, const SampleMatrix& x) {
  double acc = 0.0;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    auto col = x.column(j);
    acc += eval_phi(phi, col);
  }
  const auto sums = x.row_sums();
  return acc - eval_phi(phi, sums);
}

EssSupMixDq dq_esssup_mix(const PhiSpec& phi, const SampleMatrix& x) {
  double capital = 0.0;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    auto col = x.column(j);
    capital += eval_phi(phi, col);
  }
  const auto sums = x.row_sums();
  const double max_sum = *std::max_element(sums.begin(), sums.end());
  const double num = max_sum - capital;
  if (num <= 0.0) return {0.0, false};
  const double den = max_sum - eval_phi(phi, sums);
  if (den <= 0.0) return {kInf, true};
  return {num / den, false};
}

}  // namespace divq
