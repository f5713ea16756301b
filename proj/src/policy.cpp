#include "seit/policy.hpp"

#include <cmath>
#include <json.hpp>
#include <numeric>
#include <utility>

#include "seit/error.hpp"

namespace seit {

namespace {

constexpr std::pair<Action, std::string_view> kActionNames[] = {
    {Action::Block, "Block"},
    {Action::ForwardToIDS, "ForwardToIDS"},
    {Action::ForwardToProxy, "ForwardToProxy"},
    {Action::Allow, "Allow"},
};

[[noreturn]] void malformed(const std::string& application, const std::string& why) {
  throw Error(ErrorCode::MalformedProfile, application + ": " + why);
}

}  // namespace

std::string_view to_string(Action action) noexcept {
  for (const auto& [a, name] : kActionNames) {
    if (a == action) return name;
  }
  return "Unknown";
}

Action action_from_string(std::string_view text) {
  for (const auto& [a, name] : kActionNames) {
    if (name == text) return a;
  }
  throw Error(ErrorCode::MalformedProfile, "unknown action '" + std::string(text) + "'");
}

PolicyProfile::PolicyProfile(std::string application, std::vector<Band> bands,
                             MonotonicityCheck check)
    : application_(std::move(application)), bands_(std::move(bands)) {
  if (bands_.empty()) malformed(application_, "no bands");
  if (bands_.front().lower != 0.0) malformed(application_, "first band must start at 0");
  if (bands_.back().upper != 1.0) malformed(application_, "last band must end at 1");
  for (std::size_t i = 0; i < bands_.size(); ++i) {
    const Band& b = bands_[i];
    if (!std::isfinite(b.lower) || !std::isfinite(b.upper) || !(b.lower < b.upper)) {
      malformed(application_, "band " + std::to_string(i) + " is empty or inverted");
    }
    if (i == 0) continue;
    const Band& prev = bands_[i - 1];
    if (prev.upper < b.lower) malformed(application_, "gap before band " + std::to_string(i));
    if (prev.upper > b.lower) malformed(application_, "overlap at band " + std::to_string(i));
    if (b.action < prev.action) {
      const std::string why = "band " + std::to_string(i) + " (" + std::string(to_string(b.action)) +
                              ") is more restrictive than the band below it";
      if (check == MonotonicityCheck::Enforce) malformed(application_, why);
      warnings_.push_back(why);
    }
  }
}

Action PolicyProfile::action_for(double score) const {
  if (!std::isfinite(score) || score < 0.0 || score > 1.0) {
    throw Error(ErrorCode::InvalidParameter, "score outside [0, 1]");
  }
  for (const Band& b : bands_) {
    if (score < b.upper) return b.action;
  }
  return bands_.back().action;
}

PolicyProfile builtin_profile(std::string_view application) {
  constexpr double cuts[] = {0.0, 0.1, 0.2, 0.5, 0.8, 1.0};
  using A = Action;
  const auto column = [&](std::string name, std::initializer_list<Action> actions) {
    std::vector<Band> bands;
    std::size_t i = 0;
    for (Action a : actions) {
      bands.push_back({cuts[i], cuts[i + 1], a});
      ++i;
    }
    return PolicyProfile(std::move(name), std::move(bands));
  };
  if (application == "Mail") {
    return column("Mail", {A::Block, A::Block, A::Block, A::ForwardToIDS, A::ForwardToIDS});
  }
  if (application == "WebServer") {
    return column("WebServer",
                  {A::Block, A::Block, A::ForwardToIDS, A::ForwardToProxy, A::Allow});
  }
  if (application == "CDN") {
    return column("CDN", {A::Block, A::ForwardToIDS, A::ForwardToIDS, A::ForwardToIDS, A::Allow});
  }
  throw Error(ErrorCode::InvalidParameter, "no built-in profile '" + std::string(application) + "'");
}

std::vector<PolicyProfile> builtin_profiles() {
  return {builtin_profile("Mail"), builtin_profile("WebServer"), builtin_profile("CDN")};
}

PolicyProfile flow_controller_profile(double block_below, double bypass_from) {
  return PolicyProfile("FlowController", {{0.0, block_below, Action::Block},
                                          {block_below, bypass_from, Action::ForwardToIDS},
                                          {bypass_from, 1.0, Action::Allow}});
}

PolicyProfile parse_profile(std::string_view json_text, MonotonicityCheck check) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedProfile, e.what());
  }
  try {
    std::vector<Band> bands;
    for (const auto& b : doc.at("bands")) {
      bands.push_back({b.at("lower").get<double>(), b.at("upper").get<double>(),
                       action_from_string(b.at("action").get<std::string>())});
    }
    return PolicyProfile(doc.at("application").get<std::string>(), std::move(bands), check);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedProfile, e.what());
  }
}

std::string profile_to_json(const PolicyProfile& profile) {
  nlohmann::ordered_json doc;
  doc["application"] = profile.application();
  doc["bands"] = nlohmann::ordered_json::array();
  for (const Band& b : profile.bands()) {
    doc["bands"].push_back({{"lower", b.lower}, {"upper", b.upper}, {"action", to_string(b.action)}});
  }
  return doc.dump(2);
}

std::string_view to_string(ComponentKind kind) noexcept {
  switch (kind) {
    case ComponentKind::FlowController: return "FlowController";
    case ComponentKind::LoadBalancer: return "LoadBalancer";
    case ComponentKind::Broker: return "Broker";
    case ComponentKind::IDSSensor: return "IDSSensor";
    case ComponentKind::Monitor: return "Monitor";
  }
  return "Unknown";
}

void validate(const ShimSpec& spec) {
  for (const auto& [tag, q] : spec.outbound_weights) {
    if (!std::isfinite(q) || q < -1.0 || q > 1.0) {
      throw Error(ErrorCode::InvalidParameter, "outbound weight for '" + tag + "' outside [-1, 1]");
    }
  }
  if (spec.kind == ComponentKind::FlowController && !spec.profile) {
    throw Error(ErrorCode::InvalidParameter, "flow controller needs a policy profile");
  }
}

std::map<std::string, double> ids_default_weights() {
  return {{"connection-drop", -0.1}, {"port-scan", -0.5}};
}

Route route_for(Action action) noexcept {
  switch (action) {
    case Action::Block: return Route::Block;
    case Action::ForwardToIDS: return Route::ViaMiddlebox;
    case Action::ForwardToProxy: return Route::ViaProxy;
    case Action::Allow: return Route::Direct;
  }
  return Route::Block;
}

std::optional<FeedbackEvent> shim_outbound(const ShimSpec& spec, const ComponentEvent& event) {
  auto it = spec.outbound_weights.find(event.tag);
  if (it == spec.outbound_weights.end()) return std::nullopt;
  return FeedbackEvent{spec.owner, event.subject, it->second, event.tick, event.tag};
}

Shim::Shim(ShimSpec spec) : spec_(std::move(spec)) { validate(spec_); }

std::optional<double> Shim::sentiment() const {
  if (inbound_scores_.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& [owner, score] : inbound_scores_) sum += score;
  return sum / static_cast<double>(inbound_scores_.size());
}

ComponentCommand Shim::inbound(const ReputationUpdate& update) {
  switch (spec_.kind) {
    case ComponentKind::FlowController:
      return FlowRule{update.subject, route_for(spec_.profile->action_for(update.score))};
    case ComponentKind::LoadBalancer:
      return PoolAssignment{update.subject,
                            update.score >= spec_.pool_threshold ? Pool::Trusted : Pool::Untrusted};
    case ComponentKind::Broker:
      return Rerank{update.subject, update.score};
    case ComponentKind::Monitor: {
      if (update.subject != spec_.owner) {
        throw Error(ErrorCode::InvalidParameter, "monitor only tracks its own tenant");
      }
      const auto before = sentiment();
      inbound_scores_[update.owner] = update.score;
      const double now = *sentiment();
      const bool dropped = now < spec_.alert_threshold &&
                           (!before || *before >= spec_.alert_threshold);
      return SentimentSample{now, dropped};
    }
    case ComponentKind::IDSSensor:
      break;
  }
  throw Error(ErrorCode::UnsupportedKind,
              std::string(to_string(spec_.kind)) + " has no inbound logic");
}

}  // namespace seit
