#pragma once

#include <stdexcept>
#include <string>

namespace ssx {

// Bad caller input: invalid arguments, malformed files, out-of-range params.
// The CLI maps these to exit code 2; anything else is an internal error (1).
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A configurable cap was exceeded (e.g. exhaustive isomorphism search size).
struct ResourceError : ValidationError {
  using ValidationError::ValidationError;
};

}  // namespace ssx
