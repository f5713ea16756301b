#include "seit/protocol.hpp"

#include <cmath>
#include <json.hpp>
#include <set>

#include "seit/error.hpp"

namespace seit::protocol {

using nlohmann::ordered_json;

namespace {

[[noreturn]] void violation(const std::string& why) { throw Error(ErrorCode::SchemaViolation, why); }

// Field access that records which keys a decoder consumed so leftovers can
// be rejected.
class Reader {
 public:
  explicit Reader(const ordered_json& obj) : obj_(obj) {}

  const ordered_json* optional(const char* key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }
  const ordered_json& required(const char* key) {
    if (const ordered_json* v = optional(key)) return *v;
    violation(std::string("missing field '") + key + "'");
  }

  std::string string(const char* key) { return as_string(required(key), key); }
  std::optional<std::string> opt_string(const char* key) {
    const ordered_json* v = optional(key);
    if (v == nullptr) return std::nullopt;
    return as_string(*v, key);
  }
  TenantId tenant(const char* key) {
    std::string s = string(key);
    if (s.empty()) violation(std::string("field '") + key + "' must be a non-empty id");
    return TenantId(std::move(s));
  }
  double number(const char* key) { return as_number(required(key), key); }
  std::int64_t integer(const char* key) { return as_integer(required(key), key); }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.contains(key)) violation("unknown field '" + key + "'");
    }
  }

  static std::string as_string(const ordered_json& v, const char* key) {
    if (!v.is_string()) violation(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
  }
  static double as_number(const ordered_json& v, const char* key) {
    if (!v.is_number()) violation(std::string("field '") + key + "' must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) violation(std::string("field '") + key + "' must be finite");
    return d;
  }
  static std::int64_t as_integer(const ordered_json& v, const char* key) {
    if (v.is_number_unsigned()) {
      if (v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
        violation(std::string("field '") + key + "' is out of range");
      }
      return static_cast<std::int64_t>(v.get<std::uint64_t>());
    }
    if (!v.is_number_integer()) violation(std::string("field '") + key + "' must be an integer");
    return v.get<std::int64_t>();
  }

 private:
  const ordered_json& obj_;
  std::set<std::string> seen_;
};

double unit_score(double v, const char* key) {
  if (v < 0.0 || v > 1.0) violation(std::string("field '") + key + "' must lie in [0, 1]");
  return v;
}

ComponentRole role_from(const std::string& s) {
  if (s == "service") return ComponentRole::Service;
  if (s == "executor") return ComponentRole::Executor;
  if (s == "sensor") return ComponentRole::Sensor;
  violation("component kind must be service, executor or sensor");
}

ComponentDescriptor component_from(const ordered_json& v) {
  if (!v.is_object()) violation("field 'component' must be an object");
  Reader r(v);
  ComponentDescriptor c;
  c.name = r.string("name");
  if (c.name.empty()) violation("component name must not be empty");
  c.address = r.string("address");
  c.kind = role_from(r.string("kind"));
  c.description = r.string("description");
  const ordered_json& tasks = r.required("tasks");
  if (!tasks.is_array()) violation("field 'tasks' must be an array");
  for (const auto& t : tasks) c.tasks.push_back(Reader::as_string(t, "tasks"));
  r.finish();
  return c;
}

ordered_json component_json(const ComponentDescriptor& c) {
  return ordered_json{{"name", c.name},
                      {"address", c.address},
                      {"kind", to_string(c.kind)},
                      {"description", c.description},
                      {"tasks", c.tasks}};
}

std::vector<TenantId> id_list(const ordered_json& v, const char* key) {
  if (!v.is_array()) violation(std::string("field '") + key + "' must be an array");
  std::vector<TenantId> out;
  for (const auto& e : v) {
    std::string s = Reader::as_string(e, key);
    if (s.empty()) violation(std::string("field '") + key + "' holds an empty id");
    out.emplace_back(std::move(s));
  }
  return out;
}

template <typename T>
void put_opt(ordered_json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

struct Encoder {
  ordered_json operator()(const Register& m) const {
    ordered_json j{{"type", "register"}, {"tenant", m.tenant.str()}};
    if (m.component) j["component"] = component_json(*m.component);
    put_opt(j, "request_id", m.request_id);
    return j;
  }
  ordered_json operator()(const ConnectRequest& m) const {
    ordered_json j{{"type", "connect_request"}, {"src", m.src.str()}, {"dst", m.dst.str()}};
    put_opt(j, "request_id", m.request_id);
    return j;
  }
  ordered_json operator()(const ConnectApprove& m) const {
    ordered_json path = ordered_json::array();
    for (const auto& id : m.path) path.push_back(id.str());
    ordered_json j{{"type", "connect_approve"}, {"src", m.src.str()}, {"dst", m.dst.str()},
                   {"path", path}, {"score", m.score}};
    put_opt(j, "request_id", m.request_id);
    return j;
  }
  ordered_json operator()(const ConnectReject& m) const {
    ordered_json j{{"type", "connect_reject"}, {"src", m.src.str()}, {"dst", m.dst.str()},
                   {"reason", m.reason}};
    put_opt(j, "request_id", m.request_id);
    return j;
  }
  ordered_json operator()(const Feedback& m) const {
    ordered_json j{{"type", "feedback"}, {"reporter", m.reporter.str()},
                   {"subject", m.subject.str()}, {"q", m.q}};
    put_opt(j, "cause", m.cause);
    put_opt(j, "request_id", m.request_id);
    return j;
  }
  ordered_json operator()(const Configure& m) const {
    ordered_json j{{"type", "configure"}, {"tenant", m.tenant.str()}};
    put_opt(j, "edge_selectivity_threshold", m.edge_selectivity_threshold);
    if (m.query_rate_limit) {
      j["query_rate_limit"] = ordered_json{{"max", m.query_rate_limit->max},
                                           {"window_ticks", m.query_rate_limit->window_ticks}};
    }
    if (m.subscription) {
      ordered_json s = ordered_json::object();
      if (m.subscription->subject) s["subject"] = m.subscription->subject->str();
      s["thresholds"] = m.subscription->thresholds;
      j["subscription"] = s;
    }
    put_opt(j, "request_id", m.request_id);
    return j;
  }
  ordered_json operator()(const ReputationUpdateMsg& m) const {
    return ordered_json{{"type", "reputation_update"}, {"subscriber", m.subscriber.str()},
                        {"subject", m.subject.str()},  {"score", m.score},
                        {"threshold", m.threshold},    {"direction", m.direction},
                        {"tick", m.tick}};
  }
  ordered_json operator()(const ErrorMsg& m) const {
    ordered_json j{{"type", "error"}, {"code", m.code}, {"message", m.message}};
    put_opt(j, "request_id", m.request_id);
    return j;
  }
};

Message decode_object(const ordered_json& obj) {
  Reader r(obj);
  const ordered_json* type_field = r.optional("type");
  if (type_field == nullptr || !type_field->is_string()) {
    throw Error(ErrorCode::UnknownMessageType, "frame has no string 'type'");
  }
  const std::string type = type_field->get<std::string>();
  Message out;
  if (type == "register") {
    Register m;
    m.tenant = r.tenant("tenant");
    if (const auto* c = r.optional("component")) m.component = component_from(*c);
    m.request_id = r.opt_string("request_id");
    out = std::move(m);
  } else if (type == "connect_request") {
    ConnectRequest m;
    m.src = r.tenant("src");
    m.dst = r.tenant("dst");
    m.request_id = r.opt_string("request_id");
    out = std::move(m);
  } else if (type == "connect_approve") {
    ConnectApprove m;
    m.src = r.tenant("src");
    m.dst = r.tenant("dst");
    m.path = id_list(r.required("path"), "path");
    m.score = unit_score(r.number("score"), "score");
    m.request_id = r.opt_string("request_id");
    out = std::move(m);
  } else if (type == "connect_reject") {
    ConnectReject m;
    m.src = r.tenant("src");
    m.dst = r.tenant("dst");
    m.reason = r.string("reason");
    m.request_id = r.opt_string("request_id");
    out = std::move(m);
  } else if (type == "feedback") {
    Feedback m;
    m.reporter = r.tenant("reporter");
    m.subject = r.tenant("subject");
    m.q = r.number("q");
    if (m.q < -1.0 || m.q > 1.0) violation("field 'q' must lie in [-1, 1]");
    if (m.reporter == m.subject) violation("reporter and subject must differ");
    m.cause = r.opt_string("cause");
    m.request_id = r.opt_string("request_id");
    out = std::move(m);
  } else if (type == "configure") {
    Configure m;
    m.tenant = r.tenant("tenant");
    if (const auto* v = r.optional("edge_selectivity_threshold")) {
      m.edge_selectivity_threshold =
          unit_score(Reader::as_number(*v, "edge_selectivity_threshold"), "edge_selectivity_threshold");
    }
    if (const auto* v = r.optional("query_rate_limit")) {
      if (!v->is_object()) violation("field 'query_rate_limit' must be an object");
      Reader lr(*v);
      RateLimitSetting rl{lr.integer("max"), lr.integer("window_ticks")};
      lr.finish();
      if (rl.max < 0) violation("query_rate_limit.max must be >= 0");
      if (rl.window_ticks < 1) violation("query_rate_limit.window_ticks must be >= 1");
      m.query_rate_limit = rl;
    }
    if (const auto* v = r.optional("subscription")) {
      if (!v->is_object()) violation("field 'subscription' must be an object");
      Reader sr(*v);
      SubscriptionSetting s;
      if (const auto* subj = sr.optional("subject")) {
        std::string id = Reader::as_string(*subj, "subject");
        if (id.empty()) violation("subscription subject must not be empty");
        s.subject = TenantId(std::move(id));
      }
      const ordered_json& th = sr.required("thresholds");
      if (!th.is_array()) violation("field 'thresholds' must be an array");
      for (const auto& t : th) s.thresholds.push_back(unit_score(Reader::as_number(t, "thresholds"), "thresholds"));
      for (std::size_t i = 1; i < s.thresholds.size(); ++i) {
        if (!(s.thresholds[i - 1] < s.thresholds[i])) violation("thresholds must be strictly increasing");
      }
      sr.finish();
      m.subscription = std::move(s);
    }
    m.request_id = r.opt_string("request_id");
    out = std::move(m);
  } else if (type == "reputation_update") {
    ReputationUpdateMsg m;
    m.subscriber = r.tenant("subscriber");
    m.subject = r.tenant("subject");
    m.score = unit_score(r.number("score"), "score");
    m.threshold = unit_score(r.number("threshold"), "threshold");
    m.direction = r.string("direction");
    if (m.direction != "rising" && m.direction != "falling") {
      violation("direction must be rising or falling");
    }
    m.tick = r.integer("tick");
    out = std::move(m);
  } else if (type == "error") {
    ErrorMsg m;
    m.code = r.string("code");
    m.message = r.string("message");
    m.request_id = r.opt_string("request_id");
    out = std::move(m);
  } else {
    throw Error(ErrorCode::UnknownMessageType, "unknown message type '" + type + "'");
  }
  r.finish();
  return out;
}

}  // namespace

std::string_view to_string(ComponentRole role) noexcept {
  switch (role) {
    case ComponentRole::Service: return "service";
    case ComponentRole::Executor: return "executor";
    case ComponentRole::Sensor: return "sensor";
  }
  return "service";
}

std::string_view type_name(const Message& message) noexcept {
  static constexpr std::string_view names[] = {"register", "connect_request", "connect_approve",
                                               "connect_reject", "feedback", "configure",
                                               "reputation_update", "error"};
  return names[message.index()];
}

std::string encode(const Message& message) {
  return std::visit(Encoder{}, message).dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
}

Message decode(std::string_view frame) {
  if (frame.ends_with('\n')) frame.remove_suffix(1);
  if (frame.ends_with('\r')) frame.remove_suffix(1);
  if (frame.find('\n') != std::string_view::npos) {
    throw Error(ErrorCode::MalformedFrame, "frame spans several lines");
  }
  ordered_json doc;
  try {
    doc = ordered_json::parse(frame);
  } catch (const nlohmann::json::exception& e) {
    // Also covers ill-formed UTF-8, which the parser rejects.
    throw Error(ErrorCode::MalformedFrame, e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::MalformedFrame, "frame is not a JSON object");
  return decode_object(doc);
}

}  // namespace seit::protocol
