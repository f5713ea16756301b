#include "seit/manager.hpp"

#include <utility>

#include "seit/error.hpp"

namespace seit {

using namespace protocol;

bool operator==(const ManagerConfig& a, const ManagerConfig& b) {
  return a.graph == b.graph && a.default_query == b.default_query &&
         a.feedback_step == b.feedback_step;
}

namespace {

std::optional<std::string> request_id_of(const Message& m) {
  return std::visit(
      [](const auto& msg) -> std::optional<std::string> {
        if constexpr (requires { msg.request_id; }) return msg.request_id;
        return std::nullopt;
      },
      m);
}

Delivery error_to(const std::optional<TenantId>& to, ErrorCode code, std::string message,
                  std::optional<std::string> request_id) {
  return Delivery{to, ErrorMsg{std::string(to_string(code)), std::move(message), std::move(request_id)}};
}

void require_self(const std::optional<TenantId>& sender, const TenantId& actor) {
  if (*sender != actor) {
    throw Error(ErrorCode::InvalidParameter,
                sender->str() + " cannot act for " + actor.str());
  }
}

}  // namespace

Manager::Manager(ManagerConfig config)
    : config_(std::move(config)), graph_(config_.graph), queries_(config_.default_query) {
  if (!(config_.feedback_step >= 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "feedback step must be nonnegative");
  }
}

void Manager::load(ReputationGraph graph, std::vector<QueryConfig> configs) {
  QueryEngine queries(config_.default_query);
  for (auto& c : configs) queries.configure(std::move(c));
  graph_ = std::move(graph);
  queries_ = std::move(queries);
}

std::vector<Delivery> Manager::handle_frame(const std::optional<TenantId>& sender,
                                            std::string_view frame, Tick tick) {
  Message message;
  try {
    message = decode(frame);
  } catch (const Error& e) {
    return {error_to(sender, e.code(), e.what(), std::nullopt)};
  }
  return handle(sender, message, tick);
}

std::vector<Delivery> Manager::handle(const std::optional<TenantId>& sender, const Message& message,
                                      Tick tick) {
  const auto request_id = request_id_of(message);
  try {
    if (const auto* reg = std::get_if<Register>(&message)) {
      if (sender && *sender != reg->tenant) require_self(sender, reg->tenant);
      return on(*reg, tick);
    }
    if (!sender || !graph_.has_tenant(*sender)) {
      throw Error(ErrorCode::NotRegistered, "register before sending " +
                                                std::string(type_name(message)));
    }
    if (const auto* m = std::get_if<ConnectRequest>(&message)) {
      require_self(sender, m->src);
      return on(*m, tick);
    }
    if (const auto* m = std::get_if<Feedback>(&message)) {
      require_self(sender, m->reporter);
      return on(*m, tick);
    }
    if (const auto* m = std::get_if<Configure>(&message)) {
      require_self(sender, m->tenant);
      return on(*m, tick);
    }
    throw Error(ErrorCode::SchemaViolation,
                std::string(type_name(message)) + " is sent by the manager, not to it");
  } catch (const Error& e) {
    return {error_to(sender, e.code(), e.what(), request_id)};
  }
}

std::vector<Delivery> Manager::on(const Register& m, Tick) {
  if (!graph_.has_tenant(m.tenant)) graph_.register_tenant(m.tenant);
  if (m.component) components_[m.tenant][m.component->name] = *m.component;
  return {};
}

std::vector<Delivery> Manager::on(const ConnectRequest& m, Tick tick) {
  graph_.index_of(m.dst);
  if (m.src == m.dst) throw Error(ErrorCode::InvalidParameter, "cannot connect to itself");
  const auto path = queries_.find_introduction_path(graph_, m.src, m.dst, tick);
  if (!path) {
    return {Delivery{m.src, ConnectReject{m.src, m.dst, "NoPath", m.request_id}}};
  }
  // A direct hop means dst already scores src; keep that history.
  double score = 0.0;
  if (path->path.empty()) {
    score = *graph_.reputation_of(m.dst, m.src);
  } else {
    const auto chain = path->introducer_chain();
    score = graph_.establish_edge(m.dst, m.src, chain, tick).score;
  }
  ConnectApprove approve{m.src, m.dst, path->path, score, m.request_id};
  return {Delivery{m.src, approve}, Delivery{m.dst, approve}};
}

std::vector<Delivery> Manager::on(const Feedback& m, Tick tick) {
  const FeedbackEvent event{m.reporter, m.subject, m.q, tick, m.cause.value_or("")};
  const FeedbackReceipt receipt = graph_.propagate_feedback(event, config_.feedback_step);
  std::vector<Delivery> out;
  for (const EdgeChange& c : receipt.changes) {
    for (const auto& n :
         subscriptions_.process_edge_update(c.owner, c.subject, c.old_score, c.new_score, tick)) {
      out.push_back(Delivery{n.subscriber,
                             ReputationUpdateMsg{n.subscriber, n.subject, n.new_score, n.threshold,
                                                 std::string(to_string(n.direction)), n.tick}});
    }
  }
  return out;
}

std::vector<Delivery> Manager::on(const Configure& m, Tick) {
  // Build everything first so a rejected part leaves no trace.
  QueryConfig next = queries_.config_for(m.tenant);
  next.owner = m.tenant;
  if (m.edge_selectivity_threshold) next.selectivity_threshold = *m.edge_selectivity_threshold;
  if (m.query_rate_limit) {
    next.rate_limit = RateLimit{m.query_rate_limit->max, m.query_rate_limit->window_ticks};
  }
  validate(next);
  SubscriptionTable subs = subscriptions_;
  if (m.subscription) {
    if (m.subscription->subject) graph_.index_of(*m.subscription->subject);
    if (m.subscription->thresholds.empty()) {
      subs.unsubscribe(m.tenant, m.subscription->subject);
    } else {
      subs.subscribe(m.tenant, m.subscription->subject, m.subscription->thresholds);
    }
  }
  if (m.edge_selectivity_threshold || m.query_rate_limit) queries_.configure(std::move(next));
  subscriptions_ = std::move(subs);
  return {};
}

}  // namespace seit
