#include "seit/error.hpp"

namespace seit {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DuplicateTenant: return "DuplicateTenant";
    case ErrorCode::UnknownTenant: return "UnknownTenant";
    case ErrorCode::MissingIntroducerEdge: return "MissingIntroducerEdge";
    case ErrorCode::InvalidChain: return "InvalidChain";
    case ErrorCode::UnknownEdge: return "UnknownEdge";
    case ErrorCode::FeedbackOutOfRange: return "FeedbackOutOfRange";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::MissingWeight: return "MissingWeight";
    case ErrorCode::NonStochasticWeights: return "NonStochasticWeights";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidThresholds: return "InvalidThresholds";
    case ErrorCode::MalformedProfile: return "MalformedProfile";
    case ErrorCode::UnsupportedKind: return "UnsupportedKind";
    case ErrorCode::MalformedFrame: return "MalformedFrame";
    case ErrorCode::UnknownMessageType: return "UnknownMessageType";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::ConfigParseError: return "ConfigParseError";
    case ErrorCode::NotRegistered: return "NotRegistered";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
  }
  return "Unknown";
}

}  // namespace seit
