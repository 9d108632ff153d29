#include "scriptauth/error.hpp"

namespace scriptauth {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::UndecodableImage: return "UndecodableImage";
    case ErrorKind::EmptyImage: return "EmptyImage";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorKind::DuplicateLabel: return "DuplicateLabel";
    case ErrorKind::CapacityExceeded: return "CapacityExceeded";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::EmptyRegistry: return "EmptyRegistry";
    case ErrorKind::MissingDirectory: return "MissingDirectory";
    case ErrorKind::NoLabels: return "NoLabels";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorKind::CorruptModel: return "CorruptModel";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace scriptauth
