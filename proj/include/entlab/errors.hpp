#pragma once

#include <stdexcept>
#include <string>

namespace entlab {

/// Malformed or out-of-range input to an operation (violated precondition).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The request is well formed but physically meaningless: analyzer leakage
/// above threshold, a grid that cannot resolve a mode, a probability above 1.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Bad or unknown key in a configuration file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linear-algebra failure (singular measurement map, degenerate dataset).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace entlab
