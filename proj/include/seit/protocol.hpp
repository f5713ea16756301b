#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "seit/tenant.hpp"

namespace seit::protocol {

enum class ComponentRole { Service, Executor, Sensor };
std::string_view to_string(ComponentRole role) noexcept;

struct ComponentDescriptor {
  std::string name;
  std::string address;
  ComponentRole kind = ComponentRole::Service;
  std::string description;
  std::vector<std::string> tasks;

  friend bool operator==(const ComponentDescriptor&, const ComponentDescriptor&) = default;
};

struct Register {
  TenantId tenant;
  std::optional<ComponentDescriptor> component;
  std::optional<std::string> request_id;

  friend bool operator==(const Register&, const Register&) = default;
};

struct ConnectRequest {
  TenantId src;
  TenantId dst;
  std::optional<std::string> request_id;

  friend bool operator==(const ConnectRequest&, const ConnectRequest&) = default;
};

struct ConnectApprove {
  TenantId src;
  TenantId dst;
  std::vector<TenantId> path;  // intermediaries, travel order
  double score = 0.0;          // R(dst, src) after the introduction
  std::optional<std::string> request_id;

  friend bool operator==(const ConnectApprove&, const ConnectApprove&) = default;
};

struct ConnectReject {
  TenantId src;
  TenantId dst;
  std::string reason;
  std::optional<std::string> request_id;

  friend bool operator==(const ConnectReject&, const ConnectReject&) = default;
};

struct Feedback {
  TenantId reporter;
  TenantId subject;
  double q = 0.0;
  std::optional<std::string> cause;
  std::optional<std::string> request_id;

  friend bool operator==(const Feedback&, const Feedback&) = default;
};

struct RateLimitSetting {
  std::int64_t max = 0;
  std::int64_t window_ticks = 1;

  friend bool operator==(const RateLimitSetting&, const RateLimitSetting&) = default;
};

struct SubscriptionSetting {
  std::optional<TenantId> subject;  // absent: every subject
  std::vector<double> thresholds;   // empty: cancel

  friend bool operator==(const SubscriptionSetting&, const SubscriptionSetting&) = default;
};

struct Configure {
  TenantId tenant;
  std::optional<double> edge_selectivity_threshold;
  std::optional<RateLimitSetting> query_rate_limit;
  std::optional<SubscriptionSetting> subscription;
  std::optional<std::string> request_id;

  friend bool operator==(const Configure&, const Configure&) = default;
};

struct ReputationUpdateMsg {
  TenantId subscriber;
  TenantId subject;
  double score = 0.0;
  double threshold = 0.0;
  std::string direction;  // "rising" | "falling"
  std::int64_t tick = 0;

  friend bool operator==(const ReputationUpdateMsg&, const ReputationUpdateMsg&) = default;
};

struct ErrorMsg {
  std::string code;
  std::string message;
  std::optional<std::string> request_id;

  friend bool operator==(const ErrorMsg&, const ErrorMsg&) = default;
};

using Message = std::variant<Register, ConnectRequest, ConnectApprove, ConnectReject, Feedback,
                             Configure, ReputationUpdateMsg, ErrorMsg>;

std::string_view type_name(const Message& message) noexcept;

// One JSON object with fields in a fixed order, no trailing newline.
std::string encode(const Message& message);

// Parses one frame (a trailing "\n" or "\r\n" is accepted). Throws
// MalformedFrame for invalid UTF-8/JSON or a non-object, UnknownMessageType
// for a missing or unknown "type", and SchemaViolation for missing, extra or
// mistyped fields and out-of-range values.
Message decode(std::string_view frame);

}  // namespace seit::protocol
