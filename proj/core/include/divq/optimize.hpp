#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "divq/sample_matrix.hpp"

namespace divq {

/// Extra linear restriction a.w (rel) b on the portfolio weights, applied on
/// top of the simplex.
struct LinearConstraint {
  enum class Relation { LessEq, GreaterEq, Eq };
  std::vector<double> coeffs;
  Relation rel = Relation::LessEq;
  double rhs = 0.0;
};

enum class VarMethod { ExactEnum, BranchAndBound, LocalSearch };

/// A DQ minimization instance over the simplex.
struct OptProblem {
  OptProblem(SampleMatrix samples_, double alpha_)
      : samples(std::move(samples_)),
        alpha(alpha_),
        benchmark(Weights::uniform(samples.cols())) {}

  SampleMatrix samples;
  double alpha;
  Weights benchmark;  // w0 for tie-breaking
  VarMethod method = VarMethod::BranchAndBound;
  std::vector<LinearConstraint> constraints;
  std::size_t grid_resolution = 200;   // ExactEnum simplex grid
  std::size_t max_iterations = 10000;  // subgradient steps
  std::size_t max_nodes = 200000;      // branch-and-bound node budget
};

struct OptResult {
  Weights w;
  /// Value of the minimized index at w (DQ^VaR, DQ^ES, DR^SD, or the
  /// portfolio variance for the mean-variance program).
  double objective = 0.0;
  std::optional<std::size_t> exceedance_count;  // DQ^VaR only
  std::size_t iterations = 0;
  bool converged = true;
  std::vector<std::size_t> degenerate_assets;  // columns never exceeding their ES
};

/// Minimizes the scenario exceedance count over the simplex (DQ^VaR).
/// Among count-optimal weights, returns the L1-closest one to the benchmark.
OptResult min_dq_var(const OptProblem& problem);

/// Minimizes DQ^ES by projected subgradient on the conic reformulation,
/// followed by a deterministic pattern-search polish over the weights.
OptResult min_dq_es(const OptProblem& problem);

/// Minimizes DR^SD = SD(w.X) / sum_i w_i SD(X_i) via the convex quadratic
/// reparametrization v = w / (w.sigma).
OptResult min_dr_sd(const SampleMatrix& samples);

/// Markowitz: minimizes portfolio variance subject to a target mean on the
/// simplex. `returns` holds returns (not losses); the objective reported is
/// the portfolio variance.
OptResult markowitz(const SampleMatrix& returns, double target_return);

/// Canonical exceedance count used by every DQ^VaR method: the number of
/// scenarios with w.(X_j - pooled VaR thresholds) > 0.
std::size_t exceedance_count(const SampleMatrix& samples, double alpha,
                             const Weights& w);

}  // namespace divq
