#include "divq/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "divq/errors.hpp"
#include "divq/indices.hpp"
#include "divq/optimize.hpp"
#include "divq/parallel.hpp"
#include "divq/risk_measures.hpp"

namespace divq {

namespace {

constexpr double kTradingDaysPerYear = 252.0;

SampleMatrix submatrix(const SampleMatrix& m, std::size_t first_row, std::size_t count) {
  SampleMatrix s(count, m.cols());
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) s(i, j) = m(first_row + i, j);
  return s;
}

SampleMatrix negated(const SampleMatrix& m) {
  SampleMatrix s(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) s(i, j) = -m(i, j);
  return s;
}

Weights fit_weights(Strategy strategy, const SampleMatrix& window_losses,
                    const BacktestConfig& config, const Weights& previous) {
  switch (strategy) {
    case Strategy::EW:
    case Strategy::BH:
      return Weights::uniform(window_losses.cols());
    case Strategy::DqVar: {
      OptProblem p(window_losses, config.alpha);
      p.benchmark = previous;
      p.method = window_losses.cols() <= 4 ? VarMethod::ExactEnum : VarMethod::LocalSearch;
      p.grid_resolution = 100;
      return min_dq_var(p).w;
    }
    case Strategy::DqEs: {
      OptProblem p(window_losses, config.alpha);
      p.benchmark = previous;
      p.max_iterations = 2000;
      return min_dq_es(p).w;
    }
    case Strategy::DrSd:
      return min_dr_sd(window_losses).w;
    case Strategy::Markowitz:
      return markowitz(negated(window_losses), config.target_return / kTradingDaysPerYear).w;
  }
  throw std::invalid_argument("unknown strategy");
}

}  // namespace

void PriceTable::validate() const {
  if (dates.empty() || tickers.empty()) throw DataError("price table is empty");
  if (prices.size() != dates.size() * tickers.size())
    throw DataError("price table dimensions are inconsistent");
  for (std::size_t t = 1; t < dates.size(); ++t)
    if (!(dates[t - 1] < dates[t]))
      throw DataError("dates must be strictly increasing at row " + std::to_string(t + 1));
  for (double p : prices)
    if (!(p > 0.0) || !std::isfinite(p)) throw DataError("prices must be positive and finite");
}

SampleMatrix prices_to_losses(const PriceTable& table) {
  table.validate();
  const std::size_t days = table.days();
  const std::size_t n = table.assets();
  if (days < 2) throw DataError("need at least two price rows to form losses");
  SampleMatrix losses(days - 1, n);
  for (std::size_t t = 1; t < days; ++t)
    for (std::size_t j = 0; j < n; ++j)
      losses(t - 1, j) = -(table.at(t, j) / table.at(t - 1, j) - 1.0);
  return losses;
}

std::vector<double> rolling_index(const SampleMatrix& losses, std::size_t window,
                                  const IndexSpec& spec) {
  if (window == 0) throw std::invalid_argument("window must be positive");
  if (losses.rows() < window)
    throw DataError("window of " + std::to_string(window) + " rows exceeds the " +
                    std::to_string(losses.rows()) + " available");
  const std::size_t count = losses.rows() - window + 1;
  std::vector<double> out(count);
  parallel_for_index(count, [&](std::size_t k) {
    SampleMatrix w = submatrix(losses, k, window);
    switch (spec.kind) {
      case IndexSpec::Kind::DqVar:
        out[k] = dq_var(w, spec.alpha);
        break;
      case IndexSpec::Kind::DqEs:
        out[k] = dq_es(w, spec.alpha);
        break;
      case IndexSpec::Kind::DrVar:
        out[k] = dr(PhiSpec::var(spec.alpha), w);
        break;
      case IndexSpec::Kind::DrEs:
        out[k] = dr(PhiSpec::es(spec.alpha), w);
        break;
      case IndexSpec::Kind::DrSd:
        out[k] = dr(PhiSpec::sd(), w);
        break;
      case IndexSpec::Kind::DrVariance:
        out[k] = dr(PhiSpec::variance(), w);
        break;
    }
  });
  return out;
}

SummaryStats summary_stats(std::span<const double> wealth, double risk_free_annual) {
  if (wealth.size() < 2) throw DataError("need at least two wealth points");
  std::vector<double> returns(wealth.size() - 1);
  for (std::size_t k = 1; k < wealth.size(); ++k)
    returns[k - 1] = wealth[k] / wealth[k - 1] - 1.0;
  const double m = static_cast<double>(returns.size());
  const double mean = std::accumulate(returns.begin(), returns.end(), 0.0) / m;
  double ssq = 0.0;
  for (double r : returns) ssq += (r - mean) * (r - mean);
  const double sd = returns.size() > 1 ? std::sqrt(ssq / (m - 1.0)) : 0.0;

  SummaryStats stats;
  stats.annualized_return = mean * kTradingDaysPerYear;
  stats.annualized_vol = sd * std::sqrt(kTradingDaysPerYear);
  const double excess = stats.annualized_return - risk_free_annual;
  if (stats.annualized_vol == 0.0) {
    stats.sharpe_infinite = true;
    stats.sharpe = excess == 0.0
                       ? 0.0
                       : std::copysign(std::numeric_limits<double>::infinity(), excess);
  } else {
    stats.sharpe = excess / stats.annualized_vol;
  }
  return stats;
}

BacktestReport run_strategy(const PriceTable& prices, const BacktestConfig& config) {
  const SampleMatrix losses = prices_to_losses(prices);
  const std::size_t total = losses.rows();
  const std::size_t n = losses.cols();
  if (config.window == 0 || config.rebalance == 0)
    throw std::invalid_argument("window and rebalance period must be positive");
  if (total < config.window + 1)
    throw DataError("not enough history: need more than " + std::to_string(config.window) +
                    " loss rows, have " + std::to_string(total));

  BacktestReport report;
  report.wealth.push_back(1.0);
  report.dates.push_back(prices.dates[config.window]);

  Weights target = Weights::uniform(n);
  std::vector<double> holdings(n, 1.0 / static_cast<double>(n));
  bool bh_initialized = false;

  for (std::size_t day = config.window; day < total; ++day) {
    const bool rebalance_day = (day - config.window) % config.rebalance == 0;
    if (rebalance_day && (config.strategy != Strategy::BH || !bh_initialized)) {
      SampleMatrix window_losses = submatrix(losses, day - config.window, config.window);
      Weights fitted = target;
      try {
        fitted = fit_weights(config.strategy, window_losses, config, target);
      } catch (const std::exception& ex) {
        report.warnings.push_back("rebalance on " + prices.dates[day + 1] +
                                  " kept previous weights: " + ex.what());
      }
      target = fitted;
      report.weights_by_period.push_back(target);
      const double wealth = report.wealth.back();
      for (std::size_t j = 0; j < n; ++j) holdings[j] = target[j] * wealth;
      bh_initialized = true;
    }
    double wealth = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      holdings[j] *= 1.0 - losses(day, j);  // realized simple return
      wealth += holdings[j];
    }
    if (!(wealth > 0.0)) throw DataError("wealth became non-positive on " + prices.dates[day + 1]);
    report.wealth.push_back(wealth);
    report.dates.push_back(prices.dates[day + 1]);
  }

  report.stats = summary_stats(report.wealth, config.risk_free);
  return report;
}

}  // namespace divq
