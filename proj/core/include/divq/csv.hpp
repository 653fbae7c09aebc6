#pragma once

#include <iosfwd>
#include <string>

#include "divq/backtest.hpp"
#include "divq/sample_matrix.hpp"

namespace divq {

/// Shortest round-trip decimal form; infinities and NaNs serialize as the
/// tokens "inf", "-inf", "nan".
std::string format_double(double v);

/// Inverse of format_double; throws ParseError naming the line on garbage.
double parse_double(const std::string& token, long line);

/// Loads a price CSV: header "date,<ticker>...", ISO-8601 dates, positive
/// prices. Rows are sorted by date; duplicate dates, malformed numbers and
/// non-positive prices are rejected with their line number.
PriceTable load_csv(const std::string& path);

/// Loads a plain loss-sample CSV as written by write_sample_csv.
SampleMatrix load_sample_csv(const std::string& path);

void write_sample_csv(std::ostream& out, const SampleMatrix& m);

}  // namespace divq
