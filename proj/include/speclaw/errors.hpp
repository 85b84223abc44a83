#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace speclaw {

enum class ErrorKind {
  InvalidProfile,
  InvalidSpec,
  InvalidArgument,
  NonConvergence,
  NoConvergence,
  OutOfRange,
  DegenerateVariance,
  MissingVectors,
  EmptyBulk,
  AssertionFailure,
  Config,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library. `detail` is a JSON object (serialized)
/// with kind-specific fields, e.g. the eta or abscissa at which a solve failed.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string detail = "{}")
      : std::runtime_error(message), kind_(kind), detail_(std::move(detail)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace speclaw
