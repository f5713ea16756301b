#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "seit/tenant.hpp"

namespace seit {

struct GraphParams {
  // Multiplier applied to the acceptor's score of its nearest introducer
  // when a newcomer is introduced.
  double scale = 0.5;
  // Per-hop attenuation of indirect feedback along an introduction chain.
  double attenuation = 0.5;
  // Score used when an edge is established without any introducer.
  double default_global_score = 0.5;

  friend bool operator==(const GraphParams&, const GraphParams&) = default;
};

struct IntroductionRecord {
  // Intermediaries that introduced the subject to the owner, nearest
  // introducer first. Empty for bootstrap edges.
  std::vector<TenantId> chain;
  Tick created_at = 0;

  friend bool operator==(const IntroductionRecord&, const IntroductionRecord&) = default;
};

// owner's view of subject. Edges are directed; Edge(a,b) and Edge(b,a) are
// independent.
struct Edge {
  TenantId owner;
  TenantId subject;
  double score = 0.0;
  IntroductionRecord intro;
  Tick last_update = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct FeedbackEvent {
  TenantId reporter;
  TenantId subject;
  double q = 0.0;  // in [-1, 1]
  Tick tick = 0;
  std::string cause;

  friend bool operator==(const FeedbackEvent&, const FeedbackEvent&) = default;
};

struct EdgeChange {
  TenantId owner;
  TenantId subject;
  double old_score = 0.0;
  double new_score = 0.0;

  friend bool operator==(const EdgeChange&, const EdgeChange&) = default;
};

struct FeedbackReceipt {
  std::vector<EdgeChange> changes;
};

class ReputationGraph {
 public:
  explicit ReputationGraph(GraphParams params = {});

  const GraphParams& params() const noexcept { return params_; }

  // Adds a tenant with no local edges. Throws DuplicateTenant.
  const TenantId& register_tenant(TenantId id);

  bool has_tenant(const TenantId& id) const;
  std::size_t tenant_count() const noexcept { return ids_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }

  // Creates (or re-creates) Edge(acceptor, newcomer). With a non-empty chain
  // the score is scale * R(acceptor, chain[0]); with an empty chain it is the
  // default global score. Each chain[k+1] must be scored by chain[k].
  const Edge& establish_edge(const TenantId& acceptor, const TenantId& newcomer,
                             std::span<const TenantId> chain, Tick tick = 0);

  // Applies event.q to Edge(reporter, subject) with magnitude step * q, and to
  // Edge(reporter, I_k) for each k-th intermediary on that edge's chain with
  // magnitude step * q * attenuation^k. Missing reporter->I_k edges are
  // skipped. All scores are clamped to [0, 1].
  FeedbackReceipt apply_feedback(const FeedbackEvent& event, double step);

  // apply_feedback at the reporter, then at every intermediary on the
  // reporter's chain that itself scores the subject, recursively along their
  // own chains. An intermediary at position k of a chain reached with factor f
  // applies the feedback with factor f * attenuation^k. Each tenant reports at
  // most once per call.
  FeedbackReceipt propagate_feedback(const FeedbackEvent& event, double step);

  std::optional<double> reputation_of(const TenantId& owner, const TenantId& subject) const;
  const Edge* find_edge(const TenantId& owner, const TenantId& subject) const;

  const std::vector<FeedbackEvent>& feedback_log() const noexcept { return log_; }

  // Sorted by id.
  std::vector<TenantId> tenants() const;
  // Sorted by (owner, subject).
  std::vector<Edge> edges() const;
  // Edges whose subject is `subject`, sorted by owner.
  std::vector<Edge> edges_about(const TenantId& subject) const;

  // Inserts an edge verbatim (used when loading snapshots). Validates bounds
  // and endpoints but not introduction preconditions.
  void restore_edge(Edge edge);

  // Dense-index view used by path searches.
  std::optional<std::size_t> find_index(const TenantId& id) const;
  std::size_t index_of(const TenantId& id) const;
  const TenantId& id_at(std::size_t index) const { return ids_.at(index); }
  // Owners v that hold Edge(v, subject).
  const std::vector<std::size_t>& scorers_of(std::size_t subject) const { return in_.at(subject); }
  // Edges owned by `owner`, keyed by subject index.
  const std::map<std::size_t, Edge>& edges_from(std::size_t owner) const { return out_.at(owner); }
  // R(owner, subject) by index; the edge must exist.
  double score_at(std::size_t owner, std::size_t subject) const;

  friend bool operator==(const ReputationGraph&, const ReputationGraph&) = default;

 private:
  Edge* mutable_edge(std::size_t owner, std::size_t subject);
  void record_change(Edge& edge, double delta, Tick tick, FeedbackReceipt& receipt);

  GraphParams params_;
  std::vector<TenantId> ids_;
  std::unordered_map<TenantId, std::size_t> index_;
  std::vector<std::map<std::size_t, Edge>> out_;
  std::vector<std::vector<std::size_t>> in_;
  std::size_t edge_count_ = 0;
  std::vector<FeedbackEvent> log_;
};

}  // namespace seit
