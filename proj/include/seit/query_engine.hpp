#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "seit/reputation_graph.hpp"
#include "seit/tenant.hpp"

namespace seit {

struct RateLimit {
  std::int64_t max_introductions = std::numeric_limits<std::int64_t>::max();
  Tick window = 1;

  friend bool operator==(const RateLimit&, const RateLimit&) = default;
};

// Per-tenant introduction policy.
struct QueryConfig {
  TenantId owner;
  // Minimum score the owner must hold for whoever hands it a request before
  // it forwards or accepts the introduction.
  double selectivity_threshold = 0.0;
  RateLimit rate_limit;

  friend bool operator==(const QueryConfig&, const QueryConfig&) = default;
};

// Throws InvalidParameter unless threshold is in [0,1], max >= 0, window >= 1.
void validate(const QueryConfig& config);

// Ticks at which an intermediary served introductions. Ticks must be
// committed in nondecreasing order.
class IntroductionLog {
 public:
  std::int64_t served_within(Tick tick, Tick window) const;
  void commit(Tick tick);
  const std::deque<Tick>& history() const noexcept { return served_; }

  friend bool operator==(const IntroductionLog&, const IntroductionLog&) = default;

 private:
  std::deque<Tick> served_;
};

enum class DenyReason { BelowSelectivity, RateLimited };
std::string_view to_string(DenyReason reason) noexcept;

struct AdmissionDecision {
  bool allowed = false;
  std::optional<DenyReason> reason;
};

// Allows iff requester_score >= selectivity and fewer than max introductions
// were served in the trailing window (tick - window, tick]. An allow commits
// the tick to `log`.
AdmissionDecision admit_introduction(const QueryConfig& config, IntroductionLog& log,
                                     double requester_score, Tick tick);

struct PathResult {
  // Intermediaries in travel order, from the source's first introducer to the
  // last introducer before the destination. Empty for a direct connection.
  std::vector<TenantId> path;
  double bottleneck = 0.0;
  bool accepted = false;

  // The same intermediaries as the destination sees them: nearest first.
  std::vector<TenantId> introducer_chain() const;
};

class QueryEngine {
 public:
  explicit QueryEngine(QueryConfig defaults = {});

  void configure(QueryConfig config);
  const QueryConfig& config_for(const TenantId& tenant) const;
  const QueryConfig& defaults() const noexcept { return defaults_; }

  AdmissionDecision admit_introduction(const TenantId& intermediary, double requester_score,
                                       Tick tick);
  std::int64_t served_within_window(const TenantId& intermediary, Tick tick) const;

  // Widest admissible introduction path from src to dst. A hop u -> v needs
  // Edge(v, u) with a score at or above v's selectivity; every intermediary
  // must also have rate-limit headroom at `tick`. Among admissible paths the
  // one with the largest bottleneck wins, then the fewest hops, then the
  // lexicographically smallest id sequence. Rate-limit counters are committed
  // for the intermediaries of the returned path only. Throws UnknownTenant.
  std::optional<PathResult> find_introduction_path(const ReputationGraph& graph,
                                                   const TenantId& src, const TenantId& dst,
                                                   Tick tick);

  // Best admissible bottleneck from every tenant to dst, indexed like the
  // graph. No counters are committed.
  std::vector<std::optional<double>> bottlenecks_to(const ReputationGraph& graph,
                                                    const TenantId& dst, Tick tick) const;

  friend bool operator==(const QueryEngine&, const QueryEngine&) = default;

 private:
  bool has_headroom(const TenantId& tenant, Tick tick) const;

  QueryConfig defaults_;
  std::map<TenantId, QueryConfig> configs_;
  std::map<TenantId, IntroductionLog> logs_;
};

enum class Direction { Rising, Falling };
std::string_view to_string(Direction direction) noexcept;

struct ThresholdSubscription {
  TenantId subscriber;
  // nullopt matches every subject.
  std::optional<TenantId> subject_filter;
  std::vector<double> thresholds;

  friend bool operator==(const ThresholdSubscription&, const ThresholdSubscription&) = default;
};

struct CrossingNotification {
  TenantId subscriber;
  TenantId subject;
  double threshold = 0.0;
  Direction direction = Direction::Rising;
  double new_score = 0.0;
  Tick tick = 0;

  friend bool operator==(const CrossingNotification&, const CrossingNotification&) = default;
};

struct Crossing {
  double threshold;
  Direction direction;
};

// Thresholds t with old < t <= new (rising, ascending) or new <= t < old
// (falling, descending).
std::vector<Crossing> crossed_thresholds(const std::vector<double>& thresholds, double old_score,
                                         double new_score);

class SubscriptionTable {
 public:
  // Thresholds must be strictly increasing and inside [0, 1]; otherwise
  // throws InvalidThresholds. Replaces any subscription with the same
  // (subscriber, filter).
  std::uint64_t subscribe(const TenantId& subscriber, std::optional<TenantId> subject_filter,
                          std::vector<double> thresholds);
  bool unsubscribe(const TenantId& subscriber, const std::optional<TenantId>& subject_filter);

  // Notifications for Edge(owner, subject) moving from old_score to new_score.
  // The owner is the subscriber; a subject-specific subscription takes
  // precedence over the owner's wildcard one.
  std::vector<CrossingNotification> process_edge_update(const TenantId& owner,
                                                        const TenantId& subject,
                                                        double old_score, double new_score,
                                                        Tick tick) const;

  const ThresholdSubscription* find(const TenantId& subscriber,
                                    const std::optional<TenantId>& subject_filter) const;
  std::size_t size() const noexcept { return subscriptions_.size(); }

  friend bool operator==(const SubscriptionTable&, const SubscriptionTable&) = default;

 private:
  struct Entry {
    std::uint64_t id;
    ThresholdSubscription subscription;

    friend bool operator==(const Entry&, const Entry&) = default;
  };
  using Key = std::pair<TenantId, std::optional<TenantId>>;
  std::map<Key, Entry> subscriptions_;
  std::uint64_t next_id_ = 1;
};

}  // namespace seit
