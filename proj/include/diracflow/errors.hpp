#pragma once

#include <stdexcept>
#include <string>

namespace diracflow {

// Bad input: malformed files, invalid arguments, misuse of an operation.
// The CLI maps this to exit code 2.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// A quantitative check did not meet its tolerance. CLI exit code 1.
struct CheckFailure : std::runtime_error {
  explicit CheckFailure(const std::string& what) : std::runtime_error(what) {}
};

// Numerical breakdown: divergence, rank ambiguity, structure violation,
// resource caps. CLI exit code 3.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace diracflow
