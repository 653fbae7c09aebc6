#pragma once

#include <cstdint>
#include <string>

namespace divq::cli {

/// A fully-resolved command invocation. All randomized commands carry an
/// explicit seed; identical configurations produce byte-identical outputs.
struct RunConfig {
  enum class Command { Index, Simulate, Table, Optimize, Backtest };

  Command command = Command::Index;
  std::string measure = "dq-var";   // index
  std::string model = "iid-t";      // simulate
  std::string objective = "dq-es";  // optimize
  std::string method = "auto";      // optimize (dq-var)
  std::string strategy = "ew";      // backtest
  double alpha = 0.05;
  std::size_t window = 500;
  std::size_t rebalance = 21;
  std::size_t assets = 10;
  double nu = 3.0;
  std::size_t samples = 1000000;
  std::uint64_t seed = 0;
  double risk_free = 0.0;
  double target_return = 0.10;
  std::string input;
  std::string output;        // empty = stdout
  std::string stats_output;  // backtest stats JSON; empty = stdout
  std::string format = "csv";
};

/// Executes one command; throws on failure (dispatched errors carry context).
void dispatch(const RunConfig& config);

/// Full CLI entry point: parses argv, dispatches, and converts any failure
/// into a machine-readable JSON error record on stderr with a nonzero exit.
int run(int argc, const char* const* argv);

}  // namespace divq::cli
