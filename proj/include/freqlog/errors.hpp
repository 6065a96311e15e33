#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace freqlog {

// Input data breaks a model / weight / series invariant.
class InvariantViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Exact enumeration would need more outcomes than the caller allowed.
// Callers are expected to fall back to Monte Carlo.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(const std::string& what, long double outcome_count,
                 std::size_t budget)
      : std::runtime_error(what), outcome_count_(outcome_count),
        budget_(budget) {}

  long double outcome_count() const noexcept { return outcome_count_; }
  std::size_t budget() const noexcept { return budget_; }

 private:
  long double outcome_count_;
  std::size_t budget_;
};

// Malformed input text. line() is 1-based, 0 when not line oriented.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what
                                     : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace freqlog
