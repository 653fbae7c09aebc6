#include "divq/csv.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "divq/errors.hpp"

namespace divq {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

bool is_iso_date(const std::string& s) {
  if (s.size() != 10) return false;
  for (std::size_t i = 0; i < 10; ++i) {
    if (i == 4 || i == 7) {
      if (s[i] != '-') return false;
    } else if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
      return false;
    }
  }
  return true;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw DataError("empty file: " + path);
  return lines;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& token, long line) {
  std::string t = token;
  t.erase(std::remove_if(t.begin(), t.end(),
                         [](unsigned char c) { return std::isspace(c); }),
          t.end());
  if (t == "inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  if (t == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (t.empty()) throw ParseError("empty numeric field", line);
  const char* begin = t.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + t.size()) throw ParseError("malformed number '" + token + "'", line);
  return v;
}

PriceTable load_csv(const std::string& path) {
  const auto lines = read_lines(path);
  auto header = split_fields(lines[0]);
  if (header.size() < 2 || header[0] != "date")
    throw ParseError("header must be 'date,<ticker>,...'", 1);
  PriceTable table;
  table.tickers.assign(header.begin() + 1, header.end());
  const std::size_t n = table.tickers.size();

  struct Row {
    std::string date;
    std::vector<double> prices;
    long line;
  };
  std::vector<Row> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const long line_no = static_cast<long>(i + 1);
    if (lines[i].empty()) continue;
    auto fields = split_fields(lines[i]);
    if (fields.size() != n + 1)
      throw ParseError("expected " + std::to_string(n + 1) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    Row row;
    row.date = fields[0];
    row.line = line_no;
    if (!is_iso_date(row.date)) throw ParseError("malformed date '" + row.date + "'", line_no);
    for (std::size_t j = 1; j <= n; ++j) {
      const double p = parse_double(fields[j], line_no);
      if (!(p > 0.0) || !std::isfinite(p))
        throw ParseError("non-positive price '" + fields[j] + "'", line_no);
      row.prices.push_back(p);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("no data rows in " + path);

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].date == rows[i - 1].date)
      throw ParseError("duplicate date '" + rows[i].date + "'", rows[i].line);

  table.dates.reserve(rows.size());
  table.prices.reserve(rows.size() * n);
  for (const auto& row : rows) {
    table.dates.push_back(row.date);
    table.prices.insert(table.prices.end(), row.prices.begin(), row.prices.end());
  }
  table.validate();
  return table;
}

SampleMatrix load_sample_csv(const std::string& path) {
  const auto lines = read_lines(path);
  const auto header = split_fields(lines[0]);
  const std::size_t n = header.size();
  if (n == 0) throw ParseError("empty header", 1);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const long line_no = static_cast<long>(i + 1);
    auto fields = split_fields(lines[i]);
    if (fields.size() != n)
      throw ParseError("expected " + std::to_string(n) + " fields", line_no);
    std::vector<double> row(n);
    for (std::size_t j = 0; j < n; ++j) row[j] = parse_double(fields[j], line_no);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("no data rows in " + path);
  return SampleMatrix::from_rows(rows);
}

void write_sample_csv(std::ostream& out, const SampleMatrix& m) {
  for (std::size_t j = 0; j < m.cols(); ++j) {
    if (j) out << ',';
    out << 'x' << (j + 1);
  }
  out << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

}  // namespace divq
