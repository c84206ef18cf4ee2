#pragma once

#include <stdexcept>

namespace sortarm {

/// Base class for all library-domain errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A requested Cartesian target lies outside the reachable workspace box.
struct WorkspaceViolationError : Error {
  using Error::Error;
};

/// A start configuration violates the active joint limits.
struct InvalidStartError : Error {
  using Error::Error;
};

/// A file or stream could not be read, parsed, or written.
struct IoError : Error {
  using Error::Error;
};

/// Too few samples to compute the requested statistic.
struct InsufficientDataError : Error {
  using Error::Error;
};

/// An iterative procedure failed to converge or produced non-finite values.
struct NumericError : Error {
  using Error::Error;
};

}  // namespace sortarm
