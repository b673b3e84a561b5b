#pragma once

#include <stdexcept>

namespace nvmag {

// Bad arguments, bad config, out-of-contract inputs. The CLI maps this
// to exit code 1.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Numerical failure at runtime (singular system, non-convergent fit,
// unresolvable feature). The CLI maps this to exit code 2.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nvmag
