#pragma once

#include <stdexcept>
#include <string>

namespace dtninv {

/// Bad arguments or configuration supplied by the caller.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A linear solve failed, a residual check tripped, or a value went non-finite.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// File could not be read or written, or its contents are malformed.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

} // namespace dtninv
