#ifndef SELINV_TYPES_HPP_
#define SELINV_TYPES_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace selinv {

using Int = std::int64_t;

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file; 'line' is 1-based, 0 when not tied to a line.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, Int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  Int line() const { return line_; }

 private:
  Int line_;
};

class UnsupportedFieldError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Raised by the dense oracle when elimination meets a zero pivot.
class SingularMatrixError : public Error {
 public:
  explicit SingularMatrixError(Int pivot)
      : Error("matrix is singular to working precision at pivot " +
              std::to_string(pivot)),
        pivot_(pivot) {}
  Int pivot() const { return pivot_; }

 private:
  Int pivot_;
};

// Raised by the unpivoted factorization; 'column' is 0-based, in the permuted
// ordering unless relabeled by the caller.
class PivotBreakdown : public Error {
 public:
  PivotBreakdown(Int column, double pivot, const std::string& label = "column")
      : Error("pivot breakdown at " + label + " " + std::to_string(column) +
              " (pivot " + std::to_string(pivot) + ")"),
        column_(column),
        pivot_(pivot) {}
  Int column() const { return column_; }
  double pivot() const { return pivot_; }

 private:
  Int column_;
  double pivot_;
};

// A symbolic invariant was violated; indicates a bug, not bad input.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace selinv

#endif  // SELINV_TYPES_HPP_
