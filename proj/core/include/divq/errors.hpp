#pragma once

#include <stdexcept>
#include <string>

namespace divq {

/// Malformed or inconsistent input data (CSV rows, price tables, ...).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// CSV parse failure; carries the 1-based line number when known.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, long line)
      : DataError(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

/// An optimization problem has no feasible point.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

/// Degenerate problem data (zero-variance column, singular covariance, ...).
class DegeneracyError : public std::runtime_error {
 public:
  explicit DegeneracyError(const std::string& what) : std::runtime_error(what) {}
};

/// A documented invariant was violated at runtime (e.g. a non-monotone
/// risk family handed to the level inversion).
class InvariantError : public std::logic_error {
 public:
  explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace divq
