#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace seit {

enum class ErrorCode {
  // reputation graph
  DuplicateTenant,
  UnknownTenant,
  MissingIntroducerEdge,
  InvalidChain,
  UnknownEdge,
  FeedbackOutOfRange,
  InvalidParameter,
  // dynamics
  MissingWeight,
  NonStochasticWeights,
  LengthMismatch,
  // query engine
  InvalidThresholds,
  // policy
  MalformedProfile,
  UnsupportedKind,
  // protocol / service
  MalformedFrame,
  UnknownMessageType,
  SchemaViolation,
  ConfigParseError,
  NotRegistered,
  // simulation
  InvalidSpec,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace seit
