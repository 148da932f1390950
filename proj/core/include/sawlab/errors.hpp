#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sawlab {

// Argument outside the mathematical domain of an operation (negative
// conductivity, non-positive frequency, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed or inconsistent configuration. `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : std::runtime_error(what), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// A fitter could not produce any estimate (no peak, rank deficiency,
// unresolvable sidebands). Non-convergence is *not* an error; it is
// reported through FitResult::converged.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable trace file (bad header, non-numeric field, ragged row).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sawlab
