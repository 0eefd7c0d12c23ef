#pragma once

#include <stdexcept>
#include <string>

namespace neurotopo {

/// Raised when input data violates a format or domain invariant. The
/// command-line tool maps every DataError to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a Rips enumeration would exceed the configured memory budget.
class BudgetError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace neurotopo
