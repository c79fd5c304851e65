#pragma once

#include <stdexcept>
#include <string>

namespace l2ot {

/// Input file could not be parsed. `line` is 1-based; 0 means not line-specific.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg, int line = 0)
      : std::runtime_error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Optimisation produced a non-finite cost or gradient.
class NumericalError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A linear system required by a fit is singular (degenerate geometry).
class SolveError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace l2ot
