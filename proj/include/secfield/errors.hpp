#pragma once

#include <stdexcept>
#include <string>

namespace secfield {

// Error categories map one-to-one onto CLI exit statuses (see tools/secfield.cpp).

/// Non-finite intermediate or input outside a function's mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed caller input (wrong length, non-bipolar entry, bad index).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inconsistent scheme parameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A memory or enumeration budget would be exceeded.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bisection bracket does not contain a regime change.
class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace secfield
