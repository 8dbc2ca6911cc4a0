#pragma once

#include <stdexcept>
#include <string>

namespace lckw {

/// Input outside the mathematical domain of an operation (negative density,
/// density above jam, zero speed, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure produced a state it should never produce
/// (scheme blow-up, classification without a valid intermediate state).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed scenario configuration or input file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lckw
