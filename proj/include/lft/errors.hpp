#pragma once

#include <stdexcept>
#include <string>

namespace lft {

// Invalid user-supplied configuration (bad spacing, bad gamma, malformed file).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// API misuse: mismatched lattices, incomplete basis, wrong argument combination.
struct UsageError : std::logic_error {
  explicit UsageError(const std::string& msg) : std::logic_error(msg) {}
};

// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
  explicit DomainError(const std::string& msg) : std::domain_error(msg) {}
};

// A numerical procedure failed to converge or produced non-finite values.
struct NumericalError : std::runtime_error {
  double residual = 0.0;
  int iterations = 0;
  explicit NumericalError(const std::string& msg, double res = 0.0, int iters = 0)
      : std::runtime_error(msg), residual(res), iterations(iters) {}
};

}  // namespace lft
