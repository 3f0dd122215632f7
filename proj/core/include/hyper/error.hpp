#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hyper {

enum class ErrorKind {
  kDimensionMismatch,
  kNonFiniteValue,
  kInvalidArgument,
  kMalformedLine,
  kIo,
  kConfig,
  kCheckpointMismatch,
  kMissingData,
  kMissingCheckpoint,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` is what callers dispatch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hyper
