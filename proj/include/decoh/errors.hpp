#pragma once

#include <stdexcept>
#include <string>

namespace decoh {

/// Invalid user input: bad configuration, unknown keys, dimension mismatches.
/// The CLI maps this to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}
  explicit ConfigError(const std::string& message) : ConfigError("", message) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A numerical invariant was violated during a computation (branch jump,
/// loss of positive definiteness, grid too small, overflow). Exit status 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace decoh
