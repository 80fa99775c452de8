#pragma once

#include <stdexcept>
#include <string>

namespace sigdet {

/// Malformed input that is not tied to a configuration field
/// (dimension mismatch, non-positive epsilon, missing observation).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A violated configuration invariant. `field()` names the offending key.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(std::string field, const std::string& message)
      : InvalidArgument(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Mathematically meaningless request: infeasible radius, empty support,
/// probability outside (0,1), violated regime ordering.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The support enumeration would exceed the configured cap.
class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Root finding or a post-solve residual check failed.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sigdet
