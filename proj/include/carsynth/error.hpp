#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace carsynth {

enum class ErrorKind {
  MissingLabel,
  UnknownPart,
  DegenerateGeometry,
  EmptyPart,
  OutOfRange,
  WrongType,
  NoCompatiblePart,
  NonUnitAxis,
  CoincidentPoints,
  JitterExceedsFov,
  EmptyScene,
  ConfigInvalid,
  IoFailure,
  MissingMask,
  ParseError,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingLabel: return "MissingLabel";
    case ErrorKind::UnknownPart: return "UnknownPart";
    case ErrorKind::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorKind::EmptyPart: return "EmptyPart";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::WrongType: return "WrongType";
    case ErrorKind::NoCompatiblePart: return "NoCompatiblePart";
    case ErrorKind::NonUnitAxis: return "NonUnitAxis";
    case ErrorKind::CoincidentPoints: return "CoincidentPoints";
    case ErrorKind::JitterExceedsFov: return "JitterExceedsFov";
    case ErrorKind::EmptyScene: return "EmptyScene";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::MissingMask: return "MissingMask";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace carsynth
