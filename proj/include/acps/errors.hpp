#pragma once

#include <stdexcept>
#include <string>

namespace acps {

/// Argument outside the documented domain of an operation.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Operation not available for the given variant (e.g. a density of an
/// empirical CDF).
class UnsupportedOperation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Numerical failure inside a sampler or a linear solve.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace acps
