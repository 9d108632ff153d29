#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scriptauth {

enum class ErrorKind {
  InvalidConfig,
  UndecodableImage,
  EmptyImage,
  DimensionMismatch,
  EmptyTrainingSet,
  DuplicateLabel,
  CapacityExceeded,
  UnknownLabel,
  EmptyRegistry,
  MissingDirectory,
  NoLabels,
  IoFailure,
  UnsupportedVersion,
  CorruptModel,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so
/// callers (CLI exit codes, HTTP status mapping) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace scriptauth
