#pragma once

#include <stdexcept>
#include <string>

namespace damh {

/// Invalid configuration or out-of-domain argument.
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numerical failure (quadrature non-convergence, ODE blow-up, singular matrix).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace damh
