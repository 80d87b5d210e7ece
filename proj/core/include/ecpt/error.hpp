#pragma once

#include <stdexcept>
#include <string>

namespace ecpt {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments, violated preconditions, unknown names.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Input data is unusable: rejected corpus, bad vocabulary file, broken plan.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace ecpt
