#include "divq/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "divq/errors.hpp"
#include "divq/indices.hpp"
#include "divq/risk_measures.hpp"
#include "divq/simplex_lp.hpp"

namespace divq {

namespace {

using detail::LpConstraint;
using detail::LpResult;
using detail::LpStatus;
using detail::Relation;
using detail::solve_lp;

constexpr double kFeasTol = 1e-9;

double l1_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc;
}

bool satisfies_extra(const std::vector<divq::LinearConstraint>& cons,
                     std::span<const double> w) {
  for (const auto& c : cons) {
    double dot = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) dot += c.coeffs[i] * w[i];
    switch (c.rel) {
      case divq::LinearConstraint::Relation::LessEq:
        if (dot > c.rhs + kFeasTol) return false;
        break;
      case divq::LinearConstraint::Relation::GreaterEq:
        if (dot < c.rhs - kFeasTol) return false;
        break;
      case divq::LinearConstraint::Relation::Eq:
        if (std::abs(dot - c.rhs) > kFeasTol) return false;
        break;
    }
  }
  return true;
}

// Shared data for the DQ^VaR solvers: centered scenario rows y_j = X_j - xhat
// and the canonical counting function.
struct VarInstance {
  const SampleMatrix& samples;
  double alpha;
  std::size_t rows;
  std::size_t n;
  std::vector<double> thresholds;       // per-column VaR_alpha
  std::vector<std::vector<double>> y;   // active scenarios only
  std::vector<std::size_t> y_index;     // original scenario index
  std::size_t base_count = 0;           // scenarios violated for every w
  const std::vector<divq::LinearConstraint>* extra;
  const Weights* w0;

  VarInstance(const OptProblem& p)
      : samples(p.samples),
        alpha(p.alpha),
        rows(p.samples.rows()),
        n(p.samples.cols()),
        extra(&p.constraints),
        w0(&p.benchmark) {
    if (!(alpha > 0.0 && alpha < 1.0))
      throw std::domain_error("alpha must lie in (0,1)");
    thresholds.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      auto col = samples.column(j);
      thresholds[j] = empirical_var(col, alpha);
    }
    for (std::size_t i = 0; i < rows; ++i) {
      std::vector<double> d(n);
      double mn = std::numeric_limits<double>::infinity();
      double mx = -mn;
      for (std::size_t j = 0; j < n; ++j) {
        d[j] = samples(i, j) - thresholds[j];
        mn = std::min(mn, d[j]);
        mx = std::max(mx, d[j]);
      }
      if (mx <= 0.0) continue;  // satisfied by every simplex point
      if (mn > 0.0) {
        ++base_count;  // violated by every simplex point
        continue;
      }
      y.push_back(std::move(d));
      y_index.push_back(i);
    }
  }

  // Count over the reduced scenario set of w.y_j > slack. Zero slack is the
  // canonical count; the LP-driven searches pass a small positive slack so
  // points sitting exactly on scenario hyperplanes are not miscounted by
  // float noise (the final margin nudge restores the canonical count).
  std::size_t reduced_count(std::span<const double> w, double slack = 0.0) const {
    std::size_t c = 0;
    for (const auto& row : y) {
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += w[j] * row[j];
      if (dot > slack) ++c;
    }
    return c;
  }

  double scenario_scale() const {
    double scale = 0.0;
    for (const auto& row : y)
      for (double v : row) scale = std::max(scale, std::abs(v));
    return scale;
  }

  std::vector<LpConstraint> base_lp(std::size_t num_vars) const {
    std::vector<LpConstraint> cons;
    LpConstraint sum;
    sum.coeffs.assign(num_vars, 0.0);
    for (std::size_t j = 0; j < n; ++j) sum.coeffs[j] = 1.0;
    sum.rel = Relation::Eq;
    sum.rhs = 1.0;
    cons.push_back(std::move(sum));
    for (const auto& c : *extra) {
      LpConstraint lc;
      lc.coeffs.assign(num_vars, 0.0);
      for (std::size_t j = 0; j < n && j < c.coeffs.size(); ++j) lc.coeffs[j] = c.coeffs[j];
      lc.rhs = c.rhs;
      switch (c.rel) {
        case divq::LinearConstraint::Relation::LessEq:
          lc.rel = Relation::LessEq;
          break;
        case divq::LinearConstraint::Relation::GreaterEq:
          lc.rel = Relation::GreaterEq;
          break;
        case divq::LinearConstraint::Relation::Eq:
          lc.rel = Relation::Eq;
          break;
      }
      cons.push_back(std::move(lc));
    }
    return cons;
  }

  // Feasibility of {w in simplex+extra : w.y_j <= -margin for j in forced};
  // returns the witness point when one exists.
  std::optional<std::vector<double>> feasible_point(const std::vector<std::size_t>& forced,
                                                    double margin = 0.0) const {
    // Variables: w (n), s+ (1), s- (1); minimize s = s+ - s- with s- capped.
    const std::size_t nv = n + 2;
    auto cons = base_lp(nv);
    for (std::size_t idx : forced) {
      LpConstraint lc;
      lc.coeffs.assign(nv, 0.0);
      for (std::size_t j = 0; j < n; ++j) lc.coeffs[j] = y[idx][j];
      lc.coeffs[n] = -1.0;
      lc.coeffs[n + 1] = 1.0;
      lc.rel = Relation::LessEq;
      lc.rhs = -margin;
      cons.push_back(std::move(lc));
    }
    {
      LpConstraint cap;  // keep the free part of s bounded
      cap.coeffs.assign(nv, 0.0);
      cap.coeffs[n + 1] = 1.0;
      cap.rel = Relation::LessEq;
      cap.rhs = 1.0;
      cons.push_back(std::move(cap));
    }
    std::vector<double> obj(nv, 0.0);
    obj[n] = 1.0;
    obj[n + 1] = -1.0;
    auto res = solve_lp(obj, cons);
    if (res.status != LpStatus::Optimal) return std::nullopt;
    if (res.objective > kFeasTol) return std::nullopt;
    return std::vector<double>(res.x.begin(), res.x.begin() + n);
  }

  // min ||w - w0||_1 over the simplex+extra with w.y_j <= -margin, j in forced.
  std::optional<std::pair<std::vector<double>, double>> closest_point(
      const std::vector<std::size_t>& forced, double margin = 0.0) const {
    const std::size_t nv = 2 * n;  // w followed by the L1 slack u
    auto cons = base_lp(nv);
    auto w0v = w0->values();
    for (std::size_t j = 0; j < n; ++j) {
      LpConstraint up;  // u_j >= w_j - w0_j
      up.coeffs.assign(nv, 0.0);
      up.coeffs[j] = -1.0;
      up.coeffs[n + j] = 1.0;
      up.rel = Relation::GreaterEq;
      up.rhs = -w0v[j];
      cons.push_back(std::move(up));
      LpConstraint dn;  // u_j >= w0_j - w_j
      dn.coeffs.assign(nv, 0.0);
      dn.coeffs[j] = 1.0;
      dn.coeffs[n + j] = 1.0;
      dn.rel = Relation::GreaterEq;
      dn.rhs = w0v[j];
      cons.push_back(std::move(dn));
    }
    for (std::size_t idx : forced) {
      LpConstraint lc;
      lc.coeffs.assign(nv, 0.0);
      for (std::size_t j = 0; j < n; ++j) lc.coeffs[j] = y[idx][j];
      lc.rel = Relation::LessEq;
      lc.rhs = -margin;
      cons.push_back(std::move(lc));
    }
    std::vector<double> obj(nv, 0.0);
    for (std::size_t j = 0; j < n; ++j) obj[n + j] = 1.0;
    auto res = solve_lp(obj, cons);
    if (res.status != LpStatus::Optimal) return std::nullopt;
    return std::make_pair(std::vector<double>(res.x.begin(), res.x.begin() + n),
                          res.objective);
  }
};

std::vector<double> clean_weights(std::vector<double> w) {
  double sum = 0.0;
  for (double& x : w) {
    if (x < 0.0) x = 0.0;
    sum += x;
  }
  if (sum <= 0.0) throw DegeneracyError("optimizer produced a zero weight vector");
  for (double& x : w) x /= sum;
  return w;
}

// Depth-first existence search: is there a feasible w violating at most
// `budget` of the reduced scenarios? Returns a witness.
struct ExistsSearch {
  const VarInstance& inst;
  const std::vector<std::size_t>& order;
  std::size_t budget;
  std::size_t node_limit;
  double slack;
  std::size_t nodes = 0;
  bool exhausted = false;
  std::optional<std::vector<double>> witness;

  bool dfs(std::vector<std::size_t>& forced, std::size_t depth, std::size_t violated) {
    if (violated > budget) return false;
    if (nodes++ >= node_limit) {
      exhausted = true;
      return false;
    }
    auto pt = inst.feasible_point(forced);
    if (!pt) return false;
    if (inst.reduced_count(*pt, slack) <= budget) {
      witness = *pt;
      return true;
    }
    if (depth == order.size()) {
      // All scenarios decided: the forced-satisfied polytope is nonempty and
      // everything else is within budget.
      witness = *pt;
      return true;
    }
    const std::size_t idx = order[depth];
    forced.push_back(idx);
    if (dfs(forced, depth + 1, violated)) return true;
    forced.pop_back();
    if (exhausted) return false;
    return dfs(forced, depth + 1, violated + 1);
  }
};

OptResult finish_var_result(const OptProblem& p, std::vector<double> w, std::size_t iterations,
                            bool converged) {
  Weights weights(clean_weights(std::move(w)));
  const std::size_t count = exceedance_count(p.samples, p.alpha, weights);
  OptResult res{weights,
                static_cast<double>(count) /
                    (static_cast<double>(p.samples.rows()) * p.alpha),
                count,
                iterations,
                converged,
                {}};
  return res;
}

std::vector<double> initial_feasible(const VarInstance& inst, const OptProblem& p) {
  std::vector<std::vector<double>> candidates;
  candidates.emplace_back(p.benchmark.values().begin(), p.benchmark.values().end());
  candidates.emplace_back(inst.n, 1.0 / static_cast<double>(inst.n));
  for (std::size_t j = 0; j < inst.n; ++j) {
    std::vector<double> e(inst.n, 0.0);
    e[j] = 1.0;
    candidates.push_back(std::move(e));
  }
  for (auto& c : candidates)
    if (satisfies_extra(*inst.extra, c)) return c;
  auto pt = inst.feasible_point({});
  if (!pt) throw InfeasibleError("extra linear constraints admit no simplex point");
  return *pt;
}

// Deterministic coordinate-pair descent on (count, L1-distance-to-benchmark),
// followed by a line-search snap toward the benchmark at constant count.
std::pair<std::vector<double>, std::size_t> var_local_search(const VarInstance& inst,
                                                             std::vector<double> w,
                                                             std::size_t max_sweeps) {
  auto score = [&](std::span<const double> x) {
    return std::make_pair(inst.reduced_count(x), l1_distance(x, inst.w0->values()));
  };
  auto best = score(w);
  std::size_t sweeps = 0;
  for (double step = 0.5; step >= 1e-4; step *= 0.5) {
    bool improved = true;
    std::size_t level_sweeps = 0;
    while (improved && sweeps < max_sweeps && level_sweeps < 40) {
      improved = false;
      ++sweeps;
      ++level_sweeps;
      for (std::size_t from = 0; from < inst.n; ++from) {
        if (w[from] < step) continue;
        for (std::size_t to = 0; to < inst.n; ++to) {
          if (to == from) continue;
          std::vector<double> cand = w;
          cand[from] -= step;
          cand[to] += step;
          if (!satisfies_extra(*inst.extra, cand)) continue;
          auto s = score(cand);
          if (s < best) {
            best = s;
            w = std::move(cand);
            improved = true;
          }
        }
      }
    }
  }

  // Move as far toward the benchmark as the optimal count allows.
  auto blend = [&](double theta) {
    std::vector<double> cand(inst.n);
    auto w0v = inst.w0->values();
    for (std::size_t j = 0; j < inst.n; ++j) cand[j] = w[j] + theta * (w0v[j] - w[j]);
    return cand;
  };
  {
    auto full = blend(1.0);
    if (satisfies_extra(*inst.extra, full) && inst.reduced_count(full) <= best.first) {
      w = full;
    } else {
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (lo + hi);
        auto cand = blend(mid);
        (satisfies_extra(*inst.extra, cand) && inst.reduced_count(cand) <= best.first ? lo : hi) =
            mid;
      }
      w = blend(lo);
    }
  }
  return {w, sweeps};
}

void enumerate_simplex_grid(std::size_t n, std::size_t resolution,
                            const std::function<void(std::span<const double>)>& visit) {
  std::vector<std::size_t> units(n, 0);
  std::vector<double> w(n, 0.0);
  const double inv = 1.0 / static_cast<double>(resolution);
  // Lexicographic recursion over compositions of `resolution` into n parts.
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos,
                                                          std::size_t remaining) {
    if (pos == n - 1) {
      units[pos] = remaining;
      for (std::size_t j = 0; j < n; ++j) w[j] = static_cast<double>(units[j]) * inv;
      visit(w);
      return;
    }
    for (std::size_t u = 0; u <= remaining; ++u) {
      units[pos] = u;
      rec(pos + 1, remaining - u);
    }
  };
  rec(0, resolution);
}

}  // namespace

std::size_t exceedance_count(const SampleMatrix& samples, double alpha, const Weights& w) {
  if (w.size() != samples.cols())
    throw std::invalid_argument("weight length does not match the number of assets");
  auto ws = w.values();
  double threshold = 0.0;
  for (std::size_t j = 0; j < samples.cols(); ++j) {
    auto col = samples.column_scaled(j, ws[j]);
    threshold += empirical_var(col, alpha);
  }
  const auto sums = samples.row_sums(ws);
  std::size_t count = 0;
  for (double s : sums)
    if (s > threshold) ++count;
  return count;
}

OptResult min_dq_var(const OptProblem& problem) {
  VarInstance inst(problem);

  if (problem.method == VarMethod::ExactEnum) {
    const std::size_t n = inst.n;
    double points = 1.0;  // C(resolution + n - 1, n - 1)
    for (std::size_t i = 1; i < n; ++i)
      points *= static_cast<double>(problem.grid_resolution + i) / static_cast<double>(i);
    if (points > 5e7)
      throw std::invalid_argument("simplex grid too large; lower the resolution or use "
                                  "branch-and-bound / local search");
    std::size_t best_count = std::numeric_limits<std::size_t>::max();
    double best_dist = std::numeric_limits<double>::infinity();
    std::vector<double> best_w;
    std::size_t visited = 0;
    enumerate_simplex_grid(n, problem.grid_resolution, [&](std::span<const double> w) {
      if (!satisfies_extra(*inst.extra, w)) return;
      ++visited;
      const std::size_t c = inst.reduced_count(w);
      if (c > best_count) return;
      const double d = l1_distance(w, inst.w0->values());
      if (c < best_count || d < best_dist - 1e-15) {
        best_count = c;
        best_dist = d;
        best_w.assign(w.begin(), w.end());
      }
    });
    if (best_w.empty())
      throw InfeasibleError("no grid point satisfies the extra linear constraints");
    return finish_var_result(problem, best_w, visited, true);
  }

  if (problem.method == VarMethod::LocalSearch) {
    auto start = initial_feasible(inst, problem);
    auto [w, sweeps] = var_local_search(inst, std::move(start), 10000);
    return finish_var_result(problem, w, sweeps, true);
  }

  // Branch-and-bound: find the optimal count by iterative deepening on the
  // violation budget, certifying each level exhausted, then pick the
  // L1-closest weight among count-optimal ones by a second search.
  auto incumbent = var_local_search(inst, initial_feasible(inst, problem), 2000).first;
  std::size_t upper = inst.reduced_count(incumbent);

  std::vector<std::size_t> order(inst.y.size());
  std::iota(order.begin(), order.end(), 0);
  // Scenarios violated at the incumbent first: they are the contested ones.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    double da = 0.0, db = 0.0;
    for (std::size_t j = 0; j < inst.n; ++j) {
      da += incumbent[j] * inst.y[a][j];
      db += incumbent[j] * inst.y[b][j];
    }
    return da > db;
  });

  const double count_slack = 1e-7 * (1.0 + inst.scenario_scale());
  bool converged = true;
  std::size_t nodes_total = 0;
  std::size_t best_count = upper;
  std::vector<double> best_w = incumbent;
  for (std::size_t m = 0; m < upper; ++m) {
    ExistsSearch search{inst, order, m, problem.max_nodes, count_slack};
    std::vector<std::size_t> forced;
    const bool found = search.dfs(forced, 0, 0);
    nodes_total += search.nodes;
    if (search.exhausted) {
      converged = false;
      break;
    }
    if (found) {
      best_count = m;
      best_w = *search.witness;
      break;
    }
  }

  // Tie-break: minimize the L1 distance to the benchmark subject to the
  // optimal count. Explore violation sets of size <= best_count, bounding by
  // the LP distance of each forced-satisfied polytope.
  double best_dist = l1_distance(best_w, inst.w0->values());
  {
    struct DistSearch {
      const VarInstance& inst;
      const std::vector<std::size_t>& order;
      std::size_t budget;
      std::size_t node_limit;
      double slack;
      std::size_t nodes = 0;
      bool exhausted = false;
      double best_dist;
      std::vector<double> best_w;

      void dfs(std::vector<std::size_t>& forced, std::size_t depth, std::size_t violated) {
        if (violated > budget) return;
        if (nodes++ >= node_limit) {
          exhausted = true;
          return;
        }
        auto sol = inst.closest_point(forced);
        if (!sol) return;
        if (sol->second >= best_dist - 1e-12) return;  // cannot improve below
        const auto& w = sol->first;
        if (inst.reduced_count(w, slack) <= budget) {
          best_dist = sol->second;
          best_w = w;
          // The LP bound is attained; nothing deeper can beat it.
          return;
        }
        if (depth == order.size()) return;
        const std::size_t idx = order[depth];
        forced.push_back(idx);
        dfs(forced, depth + 1, violated);
        forced.pop_back();
        if (exhausted) return;
        dfs(forced, depth + 1, violated + 1);
      }
    };
    DistSearch ds{inst,       order, best_count, problem.max_nodes,
                  count_slack, 0,    false,      best_dist,
                  best_w};
    std::vector<std::size_t> forced;
    ds.dfs(forced, 0, 0);
    nodes_total += ds.nodes;
    if (ds.exhausted) converged = false;
    if (!ds.best_w.empty()) {
      best_w = ds.best_w;
      best_dist = ds.best_dist;
    }
  }

  // Boundary safety: if the LP point sits on a scenario hyperplane the
  // canonical recount may flip a tie; nudge the active constraints inward.
  {
    Weights cand(clean_weights(best_w));
    if (exceedance_count(problem.samples, problem.alpha, cand) >
        best_count + inst.base_count) {
      const double scale = inst.scenario_scale();
      std::vector<std::size_t> satisfied;
      for (std::size_t i = 0; i < inst.y.size(); ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < inst.n; ++j) dot += best_w[j] * inst.y[i][j];
        if (dot <= count_slack) satisfied.push_back(i);
      }
      for (double margin = 1e-12 * (1.0 + scale); margin <= 1e-5 * (1.0 + scale);
           margin *= 10.0) {
        auto sol = inst.closest_point(satisfied, margin);
        if (!sol) continue;
        Weights retry(clean_weights(sol->first));
        if (exceedance_count(problem.samples, problem.alpha, retry) <=
            best_count + inst.base_count) {
          best_w = sol->first;
          break;
        }
      }
    }
  }

  return finish_var_result(problem, best_w, nodes_total, converged);
}

OptResult min_dq_es(const OptProblem& problem) {
  if (!problem.constraints.empty())
    throw std::invalid_argument("extra linear constraints are not supported by the ES program");
  const auto& x = problem.samples;
  const double alpha = problem.alpha;
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0,1)");
  const std::size_t rows = x.rows();
  const std::size_t n = x.cols();

  // Centered rows d_j = X_j - ES thresholds.
  std::vector<double> es(n);
  for (std::size_t j = 0; j < n; ++j) {
    auto col = x.column(j);
    es[j] = empirical_es(col, alpha);
  }
  std::vector<double> d(rows * n);
  OptResult result{Weights::uniform(n), 0.0, std::nullopt, 0, true, {}};
  for (std::size_t j = 0; j < n; ++j) {
    bool exceeds = false;
    for (std::size_t i = 0; i < rows; ++i) {
      const double v = x(i, j) - es[j];
      d[i * n + j] = v;
      exceeds = exceeds || v > 0.0;
    }
    if (!exceeds) result.degenerate_assets.push_back(j);
  }

  double max_row_norm = 0.0;
  double max_abs = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    double norm = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      norm += d[i * n + j] * d[i * n + j];
      max_abs = std::max(max_abs, std::abs(d[i * n + j]));
    }
    max_row_norm = std::max(max_row_norm, std::sqrt(norm));
  }

  auto objective = [&](std::span<const double> v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      double dot = 1.0;
      for (std::size_t j = 0; j < n; ++j) dot += v[j] * d[i * n + j];
      if (dot > 0.0) acc += dot;
    }
    return acc / static_cast<double>(rows);
  };

  if (max_abs == 0.0 || max_row_norm == 0.0) {
    // No scenario deviates from the thresholds: DQ is identically zero.
    result.objective = dq_es(x, alpha, result.w);
    return result;
  }

  // Projected subgradient with diminishing steps and best-iterate tracking.
  const double step_scale = 1.0 / max_row_norm;
  std::vector<double> v(n, 1.0 / (static_cast<double>(n) * max_abs));
  std::vector<double> best_v = v;
  double best_f = objective(v);
  double best_f_checkpoint = best_f;
  const std::size_t iters = std::max<std::size_t>(problem.max_iterations, 1);
  std::vector<double> grad(n);
  for (std::size_t t = 1; t <= iters; ++t) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double f = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      double dot = 1.0;
      const double* row = d.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) dot += v[j] * row[j];
      if (dot > 0.0) {
        f += dot;
        for (std::size_t j = 0; j < n; ++j) grad[j] += row[j];
      }
    }
    f /= static_cast<double>(rows);
    if (f < best_f) {
      best_f = f;
      best_v = v;
    }
    if (t == (iters * 4) / 5) best_f_checkpoint = best_f;
    const double step = step_scale / std::sqrt(static_cast<double>(t));
    double norm1 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      v[j] = std::max(v[j] - step * grad[j] / static_cast<double>(rows), 0.0);
      norm1 += v[j];
    }
    if (norm1 == 0.0) v = best_v;  // clipped to the origin; restart at the best point
  }
  result.iterations = iters;
  result.converged = (best_f_checkpoint - best_f) <= 1e-9 * (1.0 + std::abs(best_f));

  // Polish: pattern search over the weights with the exact inner scaling
  // handled by the index evaluation itself.
  double norm1 = std::accumulate(best_v.begin(), best_v.end(), 0.0);
  std::vector<double> w =
      norm1 > 0.0 ? clean_weights(best_v)
                  : std::vector<double>(problem.benchmark.values().begin(),
                                        problem.benchmark.values().end());
  auto value_at = [&](const std::vector<double>& cand) {
    return dq_es(x, alpha, Weights(clean_weights(cand)));
  };
  double best_val = value_at(w);
  for (double step = 0.25; step >= 1e-6; step *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (std::size_t from = 0; from < n && !improved; ++from) {
        if (w[from] < step) continue;
        for (std::size_t to = 0; to < n && !improved; ++to) {
          if (to == from) continue;
          std::vector<double> cand = w;
          cand[from] -= step;
          cand[to] += step;
          const double val = value_at(cand);
          if (val < best_val - 1e-15) {
            best_val = val;
            w = std::move(cand);
            improved = true;
          }
        }
      }
    }
  }

  result.w = Weights(clean_weights(std::move(w)));
  result.objective = best_val;
  return result;
}

namespace {

// Exact projection onto {x >= 0, sigma.x = rhs} for sigma > 0.
Eigen::VectorXd project_weighted_simplex(const Eigen::VectorXd& p, const Eigen::VectorXd& sigma,
                                         double rhs) {
  const auto n = p.size();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return p[a] / sigma[a] > p[b] / sigma[b];
  });
  double sp = 0.0, ss = 0.0, lambda = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const Eigen::Index i = idx[k];
    sp += sigma[i] * p[i];
    ss += sigma[i] * sigma[i];
    const double cand = (sp - rhs) / ss;
    const bool below_next =
        k + 1 == idx.size() || cand >= p[idx[k + 1]] / sigma[idx[k + 1]] - 1e-15;
    if (below_next && cand <= p[i] / sigma[i] + 1e-15) {
      lambda = cand;
      break;
    }
    lambda = cand;  // fall through to the full support
  }
  return (p - lambda * sigma).cwiseMax(0.0);
}

Eigen::MatrixXd column_covariance(const SampleMatrix& samples) {
  const auto rows = static_cast<Eigen::Index>(samples.rows());
  const auto n = static_cast<Eigen::Index>(samples.cols());
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      samples.data().data(), rows, n);
  Eigen::RowVectorXd mean = m.colwise().mean();
  Eigen::MatrixXd centered = m.rowwise() - mean;
  return (centered.transpose() * centered) / static_cast<double>(rows);
}

}  // namespace

OptResult min_dr_sd(const SampleMatrix& samples) {
  const auto n = static_cast<Eigen::Index>(samples.cols());
  Eigen::MatrixXd cov = column_covariance(samples);
  Eigen::VectorXd sigma(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    sigma[j] = std::sqrt(std::max(cov(j, j), 0.0));
    if (!(sigma[j] > 0.0))
      throw DegeneracyError("column " + std::to_string(j) + " has zero standard deviation");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const double lip = 2.0 * std::max(eig.eigenvalues().maxCoeff(), 1e-300);
  const double step = 1.0 / lip;

  Eigen::VectorXd v = project_weighted_simplex(
      Eigen::VectorXd::Constant(n, 1.0 / (sigma.mean() * static_cast<double>(n))), sigma, 1.0);
  double prev = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  bool converged = false;
  for (; it < 200000; ++it) {
    Eigen::VectorXd grad = 2.0 * (cov * v);
    v = project_weighted_simplex(v - step * grad, sigma, 1.0);
    const double obj = v.dot(cov * v);
    if (std::abs(prev - obj) <= 1e-15 * (1.0 + std::abs(obj))) {
      converged = true;
      break;
    }
    prev = obj;
  }

  std::vector<double> w(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) w[static_cast<std::size_t>(j)] = v[j];
  Weights weights(clean_weights(std::move(w)));

  // Report DR^SD evaluated at the returned weights.
  Eigen::VectorXd wv(n);
  for (Eigen::Index j = 0; j < n; ++j) wv[j] = weights[static_cast<std::size_t>(j)];
  const double dr_value = std::sqrt(std::max(wv.dot(cov * wv), 0.0)) / wv.dot(sigma);
  return {weights, dr_value, std::nullopt, it, converged, {}};
}

OptResult markowitz(const SampleMatrix& returns, double target_return) {
  const auto n = static_cast<Eigen::Index>(returns.cols());
  Eigen::MatrixXd cov = column_covariance(returns);
  Eigen::VectorXd mu(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    auto col = returns.column(static_cast<std::size_t>(j));
    mu[j] = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(col.size());
  }

  const double mu_min = mu.minCoeff();
  const double mu_max = mu.maxCoeff();
  const double span = std::max(1.0, std::abs(mu_max) + std::abs(mu_min));
  if (target_return > mu_max + 1e-12 * span || target_return < mu_min - 1e-12 * span)
    throw InfeasibleError("target return outside the achievable range [" +
                          std::to_string(mu_min) + ", " + std::to_string(mu_max) + "]");
  const double target = std::clamp(target_return, mu_min, mu_max);

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

  // Projection onto simplex intersect {mu.w = target}: bisection on the
  // return multiplier around the exact simplex projection.
  auto project = [&](const Eigen::VectorXd& p) {
    auto simplex = [&](double nu) {
      return project_weighted_simplex(p - nu * mu, ones, 1.0);
    };
    double lo = -1.0, hi = 1.0;
    const double scale = std::max(1.0, p.cwiseAbs().maxCoeff() / std::max(1e-12, mu.cwiseAbs().maxCoeff()));
    lo *= scale;
    hi *= scale;
    while (mu.dot(simplex(lo)) < target && lo > -1e18) lo *= 2.0;
    while (mu.dot(simplex(hi)) > target && hi < 1e18) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (mu.dot(simplex(mid)) >= target ? lo : hi) = mid;
    }
    return simplex(0.5 * (lo + hi));
  };

  // Endpoint targets: restrict to the extremal support and minimize variance.
  const bool at_max = std::abs(target - mu_max) <= 1e-14 * span;
  const bool at_min = std::abs(target - mu_min) <= 1e-14 * span;
  std::vector<Eigen::Index> support;
  if (at_max || at_min) {
    const double extremal = at_max ? mu_max : mu_min;
    for (Eigen::Index j = 0; j < n; ++j)
      if (std::abs(mu[j] - extremal) <= 1e-14 * span) support.push_back(j);
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const double lip = 2.0 * std::max(eig.eigenvalues().maxCoeff(), 1e-300);
  const double step = 1.0 / lip;

  Eigen::VectorXd w;
  std::size_t it = 0;
  bool converged = false;
  if (!support.empty()) {
    const auto k = static_cast<Eigen::Index>(support.size());
    Eigen::MatrixXd sub(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
      for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = cov(support[a], support[b]);
    Eigen::VectorXd vs = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
    const Eigen::VectorXd ones_k = Eigen::VectorXd::Ones(k);
    double prev = std::numeric_limits<double>::infinity();
    for (; it < 200000; ++it) {
      vs = project_weighted_simplex(vs - step * 2.0 * (sub * vs), ones_k, 1.0);
      const double obj = vs.dot(sub * vs);
      if (std::abs(prev - obj) <= 1e-15 * (1.0 + std::abs(obj))) {
        converged = true;
        break;
      }
      prev = obj;
    }
    w = Eigen::VectorXd::Zero(n);
    for (Eigen::Index a = 0; a < k; ++a) w[support[a]] = vs[a];
  } else {
    w = project(Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
    double prev = std::numeric_limits<double>::infinity();
    for (; it < 100000; ++it) {
      w = project(w - step * 2.0 * (cov * w));
      const double obj = w.dot(cov * w);
      if (std::abs(prev - obj) <= 1e-14 * (1.0 + std::abs(obj))) {
        converged = true;
        break;
      }
      prev = obj;
    }
  }

  std::vector<double> wv(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) wv[static_cast<std::size_t>(j)] = std::max(w[j], 0.0);
  Weights weights(clean_weights(std::move(wv)));
  Eigen::VectorXd wfinal(n);
  for (Eigen::Index j = 0; j < n; ++j) wfinal[j] = weights[static_cast<std::size_t>(j)];
  return {weights, wfinal.dot(cov * wfinal), std::nullopt, it, converged, {}};
}

}  // namespace divq
