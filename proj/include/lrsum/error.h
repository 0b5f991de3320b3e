#pragma once

#include <stdexcept>
#include <string>

namespace lrsum {

/// Input violates a documented precondition or data invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem or network failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lrsum
