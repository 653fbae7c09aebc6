#pragma once

#include <span>
#include <string>
#include <vector>

#include "divq/sample_matrix.hpp"

namespace divq {

/// Daily close prices: strictly increasing ISO dates, positive prices.
struct PriceTable {
  std::vector<std::string> dates;    // length T
  std::vector<std::string> tickers;  // length n
  std::vector<double> prices;        // T x n row-major

  std::size_t days() const { return dates.size(); }
  std::size_t assets() const { return tickers.size(); }
  double at(std::size_t t, std::size_t j) const { return prices[t * tickers.size() + j]; }

  void validate() const;  // throws DataError
};

/// Losses as negated simple returns: L_t = -(P_t/P_{t-1} - 1), (T-1) x n.
SampleMatrix prices_to_losses(const PriceTable& prices);

struct IndexSpec {
  enum class Kind { DqVar, DqEs, DrVar, DrEs, DrSd, DrVariance };
  Kind kind = Kind::DqVar;
  double alpha = 0.05;
};

/// Index value per trailing window of `window` rows; output length
/// rows - window + 1. Windows are evaluated independently (and possibly in
/// parallel).
std::vector<double> rolling_index(const SampleMatrix& losses, std::size_t window,
                                  const IndexSpec& spec);

enum class Strategy { DqVar, DqEs, DrSd, Markowitz, EW, BH };

struct BacktestConfig {
  Strategy strategy = Strategy::EW;
  std::size_t window = 500;
  std::size_t rebalance = 21;      // trading days per period
  double alpha = 0.1;              // level for the DQ objectives
  double risk_free = 0.0;          // annual rate for the Sharpe ratio
  double target_return = 0.10;     // annual target for Markowitz
};

struct SummaryStats {
  double annualized_return = 0.0;
  double annualized_vol = 0.0;
  double sharpe = 0.0;
  bool sharpe_infinite = false;  // zero-volatility wealth path
};

struct BacktestReport {
  std::vector<double> wealth;       // starts at 1 on the first fit date
  std::vector<std::string> dates;   // aligned with wealth
  std::vector<Weights> weights_by_period;
  SummaryStats stats;
  std::vector<std::string> warnings;
};

/// 252 trading days per year; mean/sd of daily wealth returns with the
/// 1/(M-1) variance convention.
SummaryStats summary_stats(std::span<const double> wealth, double risk_free_annual);

/// Monthly-rebalanced strategy simulation: weights fitted on the trailing
/// window at every rebalance date, wealth compounded with realized returns
/// in between. Optimizer failures fall back to the previous weights and are
/// recorded in the report warnings.
BacktestReport run_strategy(const PriceTable& prices, const BacktestConfig& config);

}  // namespace divq
