#pragma once

#include <stdexcept>
#include <string>

namespace eqnet {

/// Base error for every recoverable failure in the toolkit. `kind()` is a
/// short machine-readable tag (e.g. "syntax", "multiple-driver") that the CLI
/// prints as `error: <kind>: <detail>`.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string &detail)
      : std::runtime_error(detail), kind_(std::move(kind)) {}

  const std::string &kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

/// Raised when an internal invariant fails; maps to CLI exit code 3.
class InvariantError : public Error {
public:
  explicit InvariantError(const std::string &detail) : Error("invariant", detail) {}
};

} // namespace eqnet
