#include "divq/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "divq/backtest.hpp"
#include "divq/csv.hpp"
#include "divq/errors.hpp"
#include "divq/indices.hpp"
#include "divq/models.hpp"
#include "divq/optimize.hpp"

namespace divq::cli {

namespace {

using nlohmann::json;

json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);  // "inf" / "-inf" / "nan" tokens
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw DataError("cannot open output file: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

IndexSpec::Kind parse_measure(const std::string& name) {
  if (name == "dq-var") return IndexSpec::Kind::DqVar;
  if (name == "dq-es") return IndexSpec::Kind::DqEs;
  if (name == "dr-var") return IndexSpec::Kind::DrVar;
  if (name == "dr-es") return IndexSpec::Kind::DrEs;
  if (name == "dr-sd") return IndexSpec::Kind::DrSd;
  if (name == "dr-variance") return IndexSpec::Kind::DrVariance;
  throw std::invalid_argument("unknown measure '" + name + "'");
}

Strategy parse_strategy(const std::string& name) {
  if (name == "dq-var") return Strategy::DqVar;
  if (name == "dq-es") return Strategy::DqEs;
  if (name == "dr-sd") return Strategy::DrSd;
  if (name == "markowitz") return Strategy::Markowitz;
  if (name == "ew") return Strategy::EW;
  if (name == "bh") return Strategy::BH;
  throw std::invalid_argument("unknown strategy '" + name + "'");
}

ModelSpec parse_model(const RunConfig& cfg) {
  if (cfg.model == "gaussian") return ModelSpec::standard_gaussian(cfg.assets, cfg.seed);
  if (cfg.model == "iid-t") return ModelSpec::iid_t(cfg.nu, cfg.assets, cfg.seed);
  if (cfg.model == "common-shock-t")
    return ModelSpec::common_shock_t(cfg.nu, cfg.assets, cfg.seed);
  throw std::invalid_argument("unknown model '" + cfg.model + "'");
}

void run_index(const RunConfig& cfg) {
  const PriceTable prices = load_csv(cfg.input);
  const SampleMatrix losses = prices_to_losses(prices);
  IndexSpec spec{parse_measure(cfg.measure), cfg.alpha};
  const auto series = rolling_index(losses, cfg.window, spec);

  Output out(cfg.output);
  if (cfg.format == "json") {
    json rows = json::array();
    for (std::size_t k = 0; k < series.size(); ++k)
      rows.push_back({{"date", prices.dates[k + cfg.window]}, {"value", json_number(series[k])}});
    json doc{{"measure", cfg.measure},
             {"alpha", cfg.alpha},
             {"window", cfg.window},
             {"series", rows}};
    out.stream() << doc.dump(2) << '\n';
    return;
  }
  out.stream() << "date,value\n";
  for (std::size_t k = 0; k < series.size(); ++k)
    out.stream() << prices.dates[k + cfg.window] << ',' << format_double(series[k]) << '\n';
}

void run_simulate(const RunConfig& cfg) {
  const SampleMatrix m = sample_model(parse_model(cfg), cfg.samples);
  Output out(cfg.output);
  write_sample_csv(out.stream(), m);
}

void run_table(const RunConfig& cfg) {
  const auto rows = reproduce_table(cfg.alpha, cfg.assets, cfg.nu, cfg.samples, cfg.seed);
  Output out(cfg.output);
  if (cfg.format == "json") {
    json doc = json::array();
    for (const auto& r : rows)
      doc.push_back({{"model", r.label},
                     {"dq_var", json_number(r.dq_var)},
                     {"dq_es", json_number(r.dq_es)},
                     {"dr_var", json_number(r.dr_var)},
                     {"dr_es", json_number(r.dr_es)},
                     {"dr_sd", json_number(r.dr_sd)},
                     {"dr_variance", json_number(r.dr_variance)}});
    out.stream() << doc.dump(2) << '\n';
    return;
  }
  out.stream() << "model,dq_var,dq_es,dr_var,dr_es,dr_sd,dr_variance\n";
  for (const auto& r : rows)
    out.stream() << r.label << ',' << format_double(r.dq_var) << ',' << format_double(r.dq_es)
                 << ',' << format_double(r.dr_var) << ',' << format_double(r.dr_es) << ','
                 << format_double(r.dr_sd) << ',' << format_double(r.dr_variance) << '\n';
}

void run_optimize(const RunConfig& cfg) {
  const PriceTable prices = load_csv(cfg.input);
  const SampleMatrix losses = prices_to_losses(prices);

  OptResult result{Weights::uniform(losses.cols()), 0.0, std::nullopt, 0, true, {}};
  if (cfg.objective == "dq-var") {
    OptProblem p(losses, cfg.alpha);
    if (cfg.method == "exact-enum") {
      p.method = VarMethod::ExactEnum;
    } else if (cfg.method == "branch-and-bound") {
      p.method = VarMethod::BranchAndBound;
    } else if (cfg.method == "local-search") {
      p.method = VarMethod::LocalSearch;
    } else if (cfg.method == "auto") {
      p.method = losses.cols() <= 4 ? VarMethod::ExactEnum : VarMethod::LocalSearch;
    } else {
      throw std::invalid_argument("unknown method '" + cfg.method + "'");
    }
    result = min_dq_var(p);
  } else if (cfg.objective == "dq-es") {
    OptProblem p(losses, cfg.alpha);
    result = min_dq_es(p);
  } else if (cfg.objective == "dr-sd") {
    result = min_dr_sd(losses);
  } else if (cfg.objective == "markowitz") {
    SampleMatrix returns(losses.rows(), losses.cols());
    for (std::size_t i = 0; i < losses.rows(); ++i)
      for (std::size_t j = 0; j < losses.cols(); ++j) returns(i, j) = -losses(i, j);
    result = markowitz(returns, cfg.target_return / 252.0);
  } else {
    throw std::invalid_argument("unknown objective '" + cfg.objective + "'");
  }

  json weights = json::array();
  for (std::size_t j = 0; j < result.w.size(); ++j) weights.push_back(result.w[j]);
  json doc{{"objective", cfg.objective},
           {"value", json_number(result.objective)},
           {"weights", weights},
           {"iterations", result.iterations},
           {"converged", result.converged}};
  if (result.exceedance_count) doc["exceedance_count"] = *result.exceedance_count;
  if (!result.degenerate_assets.empty()) doc["degenerate_assets"] = result.degenerate_assets;
  if (cfg.objective != "markowitz" && cfg.objective != "dr-sd") doc["alpha"] = cfg.alpha;

  Output out(cfg.output);
  out.stream() << doc.dump(2) << '\n';
}

void run_backtest(const RunConfig& cfg) {
  const PriceTable prices = load_csv(cfg.input);
  BacktestConfig bc;
  bc.strategy = parse_strategy(cfg.strategy);
  bc.window = cfg.window;
  bc.rebalance = cfg.rebalance;
  bc.alpha = cfg.alpha;
  bc.risk_free = cfg.risk_free;
  bc.target_return = cfg.target_return;
  const BacktestReport report = run_strategy(prices, bc);

  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';

  {
    Output out(cfg.output);
    out.stream() << "date,wealth\n";
    for (std::size_t k = 0; k < report.wealth.size(); ++k)
      out.stream() << report.dates[k] << ',' << format_double(report.wealth[k]) << '\n';
  }
  {
    json periods = json::array();
    for (const auto& w : report.weights_by_period) {
      json row = json::array();
      for (std::size_t j = 0; j < w.size(); ++j) row.push_back(w[j]);
      periods.push_back(row);
    }
    json doc{{"strategy", cfg.strategy},
             {"annualized_return", json_number(report.stats.annualized_return)},
             {"annualized_vol", json_number(report.stats.annualized_vol)},
             {"sharpe", json_number(report.stats.sharpe)},
             {"sharpe_infinite", report.stats.sharpe_infinite},
             {"warnings", report.warnings},
             {"weights_by_period", periods}};
    Output out(cfg.stats_output);
    out.stream() << doc.dump(2) << '\n';
  }
}

const char* command_name(RunConfig::Command c) {
  switch (c) {
    case RunConfig::Command::Index:
      return "index";
    case RunConfig::Command::Simulate:
      return "simulate";
    case RunConfig::Command::Table:
      return "table";
    case RunConfig::Command::Optimize:
      return "optimize";
    case RunConfig::Command::Backtest:
      return "backtest";
  }
  return "unknown";
}

}  // namespace

void dispatch(const RunConfig& config) {
  switch (config.command) {
    case RunConfig::Command::Index:
      run_index(config);
      return;
    case RunConfig::Command::Simulate:
      run_simulate(config);
      return;
    case RunConfig::Command::Table:
      run_table(config);
      return;
    case RunConfig::Command::Optimize:
      run_optimize(config);
      return;
    case RunConfig::Command::Backtest:
      run_backtest(config);
      return;
  }
  throw std::invalid_argument("unknown command");
}

int run(int argc, const char* const* argv) {
  RunConfig cfg;
  CLI::App app{"Diversification quotients: indices, simulation tables, portfolio "
               "optimization and backtests"};
  app.require_subcommand(1);

  auto* index = app.add_subcommand("index", "Rolling-window diversification index series");
  index->add_option("--measure", cfg.measure,
                    "dq-var | dq-es | dr-var | dr-es | dr-sd | dr-variance");
  index->add_option("--alpha", cfg.alpha, "risk level in (0,1)");
  index->add_option("--window", cfg.window, "rolling window length in days");
  index->add_option("--input", cfg.input, "price CSV (date,<ticker>,...)")->required();
  index->add_option("--output", cfg.output, "output path (default stdout)");
  index->add_option("--format", cfg.format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));

  auto* simulate = app.add_subcommand("simulate", "Draw a joint loss sample from a model");
  simulate->add_option("--model", cfg.model, "gaussian | iid-t | common-shock-t");
  simulate->add_option("--n", cfg.assets, "number of assets");
  simulate->add_option("--nu", cfg.nu, "t degrees of freedom");
  simulate->add_option("--samples", cfg.samples, "number of scenarios")->required();
  simulate->add_option("--seed", cfg.seed, "RNG seed")->required();
  simulate->add_option("--output", cfg.output, "output path (default stdout)");

  auto* table = app.add_subcommand("table", "Simulation table of DQs and DRs per model");
  table->add_option("--alpha", cfg.alpha, "risk level in (0,1)");
  table->add_option("--n", cfg.assets, "number of assets");
  table->add_option("--nu", cfg.nu, "t degrees of freedom");
  table->add_option("--samples", cfg.samples, "Monte Carlo sample count")->required();
  table->add_option("--seed", cfg.seed, "RNG seed")->required();
  table->add_option("--output", cfg.output, "output path (default stdout)");
  table->add_option("--format", cfg.format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));

  auto* optimize = app.add_subcommand("optimize", "Minimize a diversification index");
  optimize->add_option("--objective", cfg.objective, "dq-var | dq-es | dr-sd | markowitz");
  optimize->add_option("--alpha", cfg.alpha, "risk level for the DQ objectives");
  optimize->add_option("--method", cfg.method,
                       "dq-var method: auto | exact-enum | branch-and-bound | local-search");
  optimize->add_option("--target-return", cfg.target_return, "annual target (markowitz)");
  optimize->add_option("--input", cfg.input, "price CSV")->required();
  optimize->add_option("--output", cfg.output, "output path (default stdout)");

  auto* backtest = app.add_subcommand("backtest", "Rolling rebalanced strategy simulation");
  backtest->add_option("--strategy", cfg.strategy,
                       "dq-var | dq-es | dr-sd | markowitz | ew | bh");
  backtest->add_option("--alpha", cfg.alpha, "risk level for the DQ strategies");
  backtest->add_option("--window", cfg.window, "fitting window in days");
  backtest->add_option("--rebalance", cfg.rebalance, "days between rebalances");
  backtest->add_option("--rf", cfg.risk_free, "annual risk-free rate for the Sharpe ratio");
  backtest->add_option("--target-return", cfg.target_return, "annual target (markowitz)");
  backtest->add_option("--input", cfg.input, "price CSV")->required();
  backtest->add_option("--output", cfg.output, "wealth CSV path (default stdout)");
  backtest->add_option("--stats", cfg.stats_output, "stats JSON path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    json err{{"command", "parse"}, {"error", e.what()}};
    std::cerr << err.dump() << '\n';
    const int code = app.exit(e, std::cerr, std::cerr);
    return code == 0 ? 1 : code;
  }

  if (index->parsed()) cfg.command = RunConfig::Command::Index;
  if (simulate->parsed()) cfg.command = RunConfig::Command::Simulate;
  if (table->parsed()) cfg.command = RunConfig::Command::Table;
  if (optimize->parsed()) cfg.command = RunConfig::Command::Optimize;
  if (backtest->parsed()) cfg.command = RunConfig::Command::Backtest;

  try {
    dispatch(cfg);
  } catch (const std::exception& ex) {
    json err{{"command", command_name(cfg.command)}, {"error", ex.what()}};
    std::cerr << err.dump() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace divq::cli
