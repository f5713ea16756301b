#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seit/protocol.hpp"
#include "seit/query_engine.hpp"
#include "seit/reputation_graph.hpp"

namespace seit {

struct ManagerConfig {
  GraphParams graph;
  QueryConfig default_query;
  double feedback_step = 0.2;
};

struct Delivery {
  // Recipient tenant; nullopt means "reply on the connection the request
  // arrived on" (used when the sender is not registered yet).
  std::optional<TenantId> to;
  protocol::Message message;
};

// The reputation manager's state machine. Not thread-safe; callers serialize
// access (see ManagerServer).
class Manager {
 public:
  explicit Manager(ManagerConfig config = {});

  // `sender` is the tenant bound to the originating session, if any. Every
  // message except register must come from a registered sender acting for
  // itself. Failures come back as an error delivery and leave the state
  // untouched.
  std::vector<Delivery> handle(const std::optional<TenantId>& sender,
                               const protocol::Message& message, Tick tick);

  // decode + handle; undecodable frames yield an error delivery.
  std::vector<Delivery> handle_frame(const std::optional<TenantId>& sender, std::string_view frame,
                                     Tick tick);

  const ReputationGraph& graph() const noexcept { return graph_; }
  const QueryEngine& queries() const noexcept { return queries_; }
  const SubscriptionTable& subscriptions() const noexcept { return subscriptions_; }
  const std::map<TenantId, std::map<std::string, protocol::ComponentDescriptor>>& components()
      const noexcept {
    return components_;
  }
  const ManagerConfig& config() const noexcept { return config_; }

  // Used by offline tooling to start from a stored snapshot.
  void load(ReputationGraph graph, std::vector<QueryConfig> configs);

  friend bool operator==(const Manager&, const Manager&) = default;

 private:
  std::vector<Delivery> on(const protocol::Register& m, Tick tick);
  std::vector<Delivery> on(const protocol::ConnectRequest& m, Tick tick);
  std::vector<Delivery> on(const protocol::Feedback& m, Tick tick);
  std::vector<Delivery> on(const protocol::Configure& m, Tick tick);

  ManagerConfig config_;
  ReputationGraph graph_;
  QueryEngine queries_;
  SubscriptionTable subscriptions_;
  std::map<TenantId, std::map<std::string, protocol::ComponentDescriptor>> components_;
};

bool operator==(const ManagerConfig& a, const ManagerConfig& b);

}  // namespace seit
