#pragma once

#include <cstddef>
#include <vector>

namespace divq::detail {

/// Minimal dense two-phase simplex solver for the small linear programs the
/// portfolio optimizers need (feasibility probes, L1 tie-breaking). Variables
/// are non-negative; constraints may be <=, >= or ==.

enum class Relation { LessEq, GreaterEq, Eq };

struct LpConstraint {
  std::vector<double> coeffs;
  Relation rel = Relation::LessEq;
  double rhs = 0.0;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
};

/// minimize c^T x subject to the constraints and x >= 0.
LpResult solve_lp(const std::vector<double>& objective,
                  const std::vector<LpConstraint>& constraints);

}  // namespace divq::detail
