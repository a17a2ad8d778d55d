#pragma once

#include <stdexcept>
#include <string>

namespace imae {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Incompatible matrix shapes.
struct ShapeError : Error {
  using Error::Error;
};

/// Out-of-range argument (negative std, bad probability, k < 1, ...).
struct ArgumentError : Error {
  using Error::Error;
};

/// Inconsistent model/loss/protocol configuration.
struct ConfigError : Error {
  using Error::Error;
};

/// Bad magic number, version or header in a binary file.
struct FormatError : Error {
  using Error::Error;
};

/// Missing, unreadable or truncated file.
struct IoError : Error {
  using Error::Error;
};

/// Two files (or sections) that should agree do not.
struct ConsistencyError : Error {
  using Error::Error;
};

/// Training produced a non-finite loss.
struct DivergenceError : Error {
  using Error::Error;
};

}  // namespace imae
