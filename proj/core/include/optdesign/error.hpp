#pragma once

#include <stdexcept>
#include <string>

namespace optdesign {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: bad weights, malformed data, violated preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An iterative method failed or a quantity degenerated to zero.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// File system or stream failure; the message names the path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace optdesign
