#include "divq/simplex_lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace divq::detail {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-9;

struct Tableau {
  std::size_t rows = 0;
  std::size_t cols = 0;  // structural + slack + artificial
  std::vector<double> a;  // rows x cols
  std::vector<double> rhs;
  std::vector<double> cost;
  double objective = 0.0;  // c_B^T x_B
  std::vector<std::size_t> basis;

  double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  void pivot(std::size_t pr, std::size_t pc) {
    const double pv = at(pr, pc);
    for (std::size_t j = 0; j < cols; ++j) at(pr, j) /= pv;
    rhs[pr] /= pv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == pr) continue;
      const double f = at(i, pc);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < cols; ++j) at(i, j) -= f * at(pr, j);
      at(i, pc) = 0.0;
      rhs[i] -= f * rhs[pr];
    }
    const double f = cost[pc];
    if (f != 0.0) {
      for (std::size_t j = 0; j < cols; ++j) cost[j] -= f * at(pr, j);
      cost[pc] = 0.0;
      objective += f * rhs[pr];
    }
    basis[pr] = pc;
  }

  void price_out(const std::vector<double>& c) {
    cost = c;
    objective = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      const double cb = cost[basis[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j < cols; ++j) cost[j] -= cb * at(i, j);
      cost[basis[i]] = 0.0;
      objective += cb * rhs[i];
    }
  }

  // Returns false when unbounded. `allowed` masks columns that may enter.
  bool iterate(const std::vector<char>& allowed, std::size_t max_iters) {
    for (std::size_t it = 0; it < max_iters; ++it) {
      // Bland's rule: first allowed column with negative reduced cost.
      std::size_t enter = cols;
      for (std::size_t j = 0; j < cols; ++j) {
        if (allowed[j] && cost[j] < -kCostTol) {
          enter = j;
          break;
        }
      }
      if (enter == cols) return true;  // optimal
      std::size_t leave = rows;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < rows; ++i) {
        const double aij = at(i, enter);
        if (aij > kPivotTol) {
          const double ratio = rhs[i] / aij;
          if (ratio < best - 1e-15 ||
              (ratio < best + 1e-15 && (leave == rows || basis[i] < basis[leave]))) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave == rows) return false;  // unbounded
      pivot(leave, enter);
    }
    throw std::runtime_error("simplex iteration limit exceeded");
  }
};

}  // namespace

LpResult solve_lp(const std::vector<double>& objective,
                  const std::vector<LpConstraint>& constraints) {
  const std::size_t n = objective.size();
  const std::size_t m = constraints.size();

  // Column layout: structural | one slack/surplus per inequality | artificials.
  std::size_t num_slack = 0;
  for (const auto& c : constraints)
    if (c.rel != Relation::Eq) ++num_slack;

  std::vector<double> row_sign(m, 1.0);
  std::vector<std::size_t> slack_col(m, 0);
  std::size_t next_slack = n;

  Tableau t;
  t.rows = m;
  t.cols = n + num_slack + m;  // reserve one artificial slot per row
  t.a.assign(t.rows * t.cols, 0.0);
  t.rhs.assign(m, 0.0);
  t.basis.assign(m, 0);

  std::vector<char> is_artificial(t.cols, 0);
  std::size_t next_artificial = n + num_slack;

  for (std::size_t i = 0; i < m; ++i) {
    const auto& c = constraints[i];
    if (c.coeffs.size() != n)
      throw std::invalid_argument("constraint length does not match the objective");
    double sign = 1.0;
    Relation rel = c.rel;
    if (c.rhs < 0.0) {  // normalize to non-negative rhs
      sign = -1.0;
      if (rel == Relation::LessEq)
        rel = Relation::GreaterEq;
      else if (rel == Relation::GreaterEq)
        rel = Relation::LessEq;
    }
    row_sign[i] = sign;
    for (std::size_t j = 0; j < n; ++j) t.at(i, j) = sign * c.coeffs[j];
    t.rhs[i] = sign * c.rhs;
    if (rel == Relation::LessEq) {
      slack_col[i] = next_slack;
      t.at(i, next_slack) = 1.0;
      t.basis[i] = next_slack;
      ++next_slack;
    } else {
      if (rel == Relation::GreaterEq) {
        slack_col[i] = next_slack;
        t.at(i, next_slack) = -1.0;
        ++next_slack;
      }
      t.at(i, next_artificial) = 1.0;
      is_artificial[next_artificial] = 1;
      t.basis[i] = next_artificial;
      ++next_artificial;
    }
  }

  const std::size_t iter_cap = 2000 + 50 * (m + t.cols);
  std::vector<char> allow_all(t.cols, 1);

  // Phase 1: drive the artificials to zero.
  bool have_artificials = false;
  for (std::size_t j = 0; j < t.cols; ++j) have_artificials |= is_artificial[j] != 0;
  if (have_artificials) {
    std::vector<double> phase1(t.cols, 0.0);
    for (std::size_t j = 0; j < t.cols; ++j)
      if (is_artificial[j]) phase1[j] = 1.0;
    t.price_out(phase1);
    if (!t.iterate(allow_all, iter_cap))
      throw std::runtime_error("phase-1 simplex reported unbounded");
    if (t.objective > 1e-7) return {LpStatus::Infeasible, {}, 0.0};
    // Pivot any residual artificial out of the basis if possible.
    for (std::size_t i = 0; i < t.rows; ++i) {
      if (!is_artificial[t.basis[i]]) continue;
      std::size_t enter = t.cols;
      for (std::size_t j = 0; j < t.cols && enter == t.cols; ++j)
        if (!is_artificial[j] && std::abs(t.at(i, j)) > kPivotTol) enter = j;
      if (enter != t.cols) t.pivot(i, enter);
      // Otherwise the row is redundant; the artificial stays basic at zero.
    }
  }

  // Phase 2 on the true objective, artificials barred from entering.
  std::vector<char> allowed(t.cols, 1);
  for (std::size_t j = 0; j < t.cols; ++j)
    if (is_artificial[j]) allowed[j] = 0;
  std::vector<double> full_cost(t.cols, 0.0);
  for (std::size_t j = 0; j < n; ++j) full_cost[j] = objective[j];
  t.price_out(full_cost);
  if (!t.iterate(allowed, iter_cap)) return {LpStatus::Unbounded, {}, 0.0};

  LpResult res;
  res.status = LpStatus::Optimal;
  res.x.assign(n, 0.0);
  for (std::size_t i = 0; i < t.rows; ++i)
    if (t.basis[i] < n) res.x[t.basis[i]] = t.rhs[i];
  res.objective = t.objective;
  return res;
}

}  // namespace divq::detail
