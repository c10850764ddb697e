#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace monolocal {

enum class ErrorCode {
  InvalidChannels,
  InvalidThresholds,
  InvalidArgument,
  DimensionMismatch,
  PointAtInfinity,
  InsufficientData,
  DegenerateConfiguration,
  NoConsensus,
  ClassifierUnavailable,
  ProtocolError,
  UnknownModel,
  MissingLines,
  NoAnchor,
  AnchorBeyondHorizon,
  ElementBeyondHorizon,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a code so callers (the CLI in
// particular) can map it to a per-frame status or an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidChannels: return "InvalidChannels";
    case ErrorCode::InvalidThresholds: return "InvalidThresholds";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::PointAtInfinity: return "PointAtInfinity";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::NoConsensus: return "NoConsensus";
    case ErrorCode::ClassifierUnavailable: return "ClassifierUnavailable";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::UnknownModel: return "UnknownModel";
    case ErrorCode::MissingLines: return "MissingLines";
    case ErrorCode::NoAnchor: return "NoAnchor";
    case ErrorCode::AnchorBeyondHorizon: return "AnchorBeyondHorizon";
    case ErrorCode::ElementBeyondHorizon: return "ElementBeyondHorizon";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace monolocal
