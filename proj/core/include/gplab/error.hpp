#pragma once

#include <stdexcept>
#include <string>

namespace gplab {

// Invalid parameters or malformed input (caller error).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation failed: bracket not found, blow-up, non-convergence.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gplab
