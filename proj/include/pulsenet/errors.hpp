#pragma once

#include <stdexcept>
#include <string>

namespace pulsenet {

// Base for every error raised by the library. The CLI maps subclasses onto
// process exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or invalid configuration (exit 2).
struct ConfigError : Error {
  using Error::Error;
};

// A fixed-step oracle was asked to use a step coarser than the fastest
// possible inter-spike interval (exit 2).
struct StepTooCoarse : Error {
  using Error::Error;
};

// Non-finite state or a broken time ordering during integration (exit 3).
struct NumericFailure : Error {
  using Error::Error;
};

// The supplied dynamics do not keep the satisfaction velocity bounded away
// from zero below the goal (exit 3).
struct ModelContractViolation : Error {
  using Error::Error;
};

} // namespace pulsenet
