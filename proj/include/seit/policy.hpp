#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "seit/reputation_graph.hpp"
#include "seit/tenant.hpp"

namespace seit {

// Ordered from most to least restrictive.
enum class Action { Block, ForwardToIDS, ForwardToProxy, Allow };

std::string_view to_string(Action action) noexcept;
Action action_from_string(std::string_view text);  // throws MalformedProfile

struct Band {
  double lower = 0.0;
  double upper = 1.0;
  Action action = Action::Allow;

  friend bool operator==(const Band&, const Band&) = default;
};

enum class MonotonicityCheck { Enforce, Warn };

// Score bands [lower, upper) covering [0, 1]; the top band also holds 1.0.
class PolicyProfile {
 public:
  // Throws MalformedProfile on gaps, overlaps, empty bands or an incomplete
  // cover. A band that is more restrictive than the one below it is an error
  // under Enforce and a recorded warning under Warn.
  PolicyProfile(std::string application, std::vector<Band> bands,
                MonotonicityCheck check = MonotonicityCheck::Enforce);

  const std::string& application() const noexcept { return application_; }
  const std::vector<Band>& bands() const noexcept { return bands_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  Action action_for(double score) const;  // throws InvalidParameter outside [0, 1]

  friend bool operator==(const PolicyProfile& a, const PolicyProfile& b) {
    return a.application_ == b.application_ && a.bands_ == b.bands_;
  }

 private:
  std::string application_;
  std::vector<Band> bands_;
  std::vector<std::string> warnings_;
};

// Example tenant score table: "Mail", "WebServer" and "CDN" columns.
PolicyProfile builtin_profile(std::string_view application);
std::vector<PolicyProfile> builtin_profiles();

// Block below 0.2, middlebox up to 0.8, direct above.
PolicyProfile flow_controller_profile(double block_below = 0.2, double bypass_from = 0.8);

// JSON form: {"application": ..., "bands": [{"lower", "upper", "action"}]}.
PolicyProfile parse_profile(std::string_view json_text,
                            MonotonicityCheck check = MonotonicityCheck::Enforce);
std::string profile_to_json(const PolicyProfile& profile);

enum class ComponentKind { FlowController, LoadBalancer, Broker, IDSSensor, Monitor };
std::string_view to_string(ComponentKind kind) noexcept;

struct ShimSpec {
  ComponentKind kind = ComponentKind::FlowController;
  TenantId owner;                       // tenant running the component
  std::optional<PolicyProfile> profile; // FlowController
  double pool_threshold = 0.5;          // LoadBalancer
  double alert_threshold = 0.4;         // Monitor
  std::map<std::string, double> outbound_weights;
};

// Throws InvalidParameter on weights outside [-1, 1] or a FlowController
// without a profile.
void validate(const ShimSpec& spec);

// connection-drop -0.1, port-scan -0.5.
std::map<std::string, double> ids_default_weights();

// Edge(owner, subject) now holds `score`.
struct ReputationUpdate {
  TenantId owner;
  TenantId subject;
  double score = 0.0;
  Tick tick = 0;
};

enum class Route { Block, ViaMiddlebox, ViaProxy, Direct };
enum class Pool { Untrusted, Trusted };

struct FlowRule {
  TenantId subject;
  Route route;
  friend bool operator==(const FlowRule&, const FlowRule&) = default;
};
struct PoolAssignment {
  TenantId subject;
  Pool pool;
  friend bool operator==(const PoolAssignment&, const PoolAssignment&) = default;
};
struct Rerank {
  TenantId subject;
  double score;
  friend bool operator==(const Rerank&, const Rerank&) = default;
};
struct SentimentSample {
  double sentiment;
  bool alert;
  friend bool operator==(const SentimentSample&, const SentimentSample&) = default;
};

using ComponentCommand = std::variant<FlowRule, PoolAssignment, Rerank, SentimentSample>;

struct ComponentEvent {
  std::string tag;
  TenantId subject;
  Tick tick = 0;
};

Route route_for(Action action) noexcept;

// Outbound logic: mapped tags become feedback from the owner, others nullopt.
std::optional<FeedbackEvent> shim_outbound(const ShimSpec& spec, const ComponentEvent& event);

class Shim {
 public:
  explicit Shim(ShimSpec spec);

  const ShimSpec& spec() const noexcept { return spec_; }

  // Inbound logic. A Monitor only consumes updates about its own tenant and
  // tracks the mean of every scorer's latest value; an alert fires when that
  // mean drops below the alert threshold. Throws UnsupportedKind for sensors
  // and InvalidParameter for a Monitor update about another tenant.
  ComponentCommand inbound(const ReputationUpdate& update);

  std::optional<FeedbackEvent> outbound(const ComponentEvent& event) const {
    return shim_outbound(spec_, event);
  }

  std::optional<double> sentiment() const;

 private:
  ShimSpec spec_;
  std::map<TenantId, double> inbound_scores_;
};

}  // namespace seit
