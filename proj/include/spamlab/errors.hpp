#pragma once

#include <stdexcept>
#include <string>

namespace spamlab {

/// Input outside the mathematical domain of an operation (negative price,
/// quantity above the demand intercept, unreachable block size).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed argument: bad derivative order, scale below one, and so on.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Spam gas s*S exceeds the block capacity.
class InfeasibleSpamError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A numerical solver failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario file or command line could not be interpreted.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spamlab
