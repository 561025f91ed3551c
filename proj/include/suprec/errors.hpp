#pragma once

#include <stdexcept>

namespace suprec {

/// Raised when generated data would violate a modeling assumption, e.g. a
/// non-centered output function.
class model_violation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an input makes a factorization meaningless (e.g. a zero matrix).
class degenerate_input : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an operation is not defined for the given argument kind.
class unsupported_operation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace suprec
