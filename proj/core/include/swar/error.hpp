#pragma once

#include <stdexcept>
#include <string>

namespace swar {

/// Raised when a caller violates an operation's preconditions (shape
/// mismatches, out-of-range arguments).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when training diverges (NaN/inf in a loss or gradient).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace swar
