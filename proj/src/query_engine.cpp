#include "seit/query_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <utility>

#include "seit/error.hpp"

namespace seit {

void validate(const QueryConfig& config) {
  if (!std::isfinite(config.selectivity_threshold) || config.selectivity_threshold < 0.0 ||
      config.selectivity_threshold > 1.0) {
    throw Error(ErrorCode::InvalidParameter, "selectivity threshold must lie in [0, 1]");
  }
  if (config.rate_limit.max_introductions < 0) {
    throw Error(ErrorCode::InvalidParameter, "max_introductions must be >= 0");
  }
  if (config.rate_limit.window < 1) {
    throw Error(ErrorCode::InvalidParameter, "rate-limit window must be >= 1 tick");
  }
}

std::int64_t IntroductionLog::served_within(Tick tick, Tick window) const {
  // Entries are sorted; count those in (tick - window, tick].
  const Tick lower = tick - window;
  auto first = std::upper_bound(served_.begin(), served_.end(), lower);
  auto last = std::upper_bound(first, served_.end(), tick);
  return static_cast<std::int64_t>(std::distance(first, last));
}

void IntroductionLog::commit(Tick tick) {
  if (!served_.empty() && tick < served_.back()) {
    throw Error(ErrorCode::InvalidParameter, "introduction ticks must be nondecreasing");
  }
  served_.push_back(tick);
}

std::string_view to_string(DenyReason reason) noexcept {
  switch (reason) {
    case DenyReason::BelowSelectivity: return "BelowSelectivity";
    case DenyReason::RateLimited: return "RateLimited";
  }
  return "Unknown";
}

std::string_view to_string(Direction direction) noexcept {
  return direction == Direction::Rising ? "rising" : "falling";
}

AdmissionDecision admit_introduction(const QueryConfig& config, IntroductionLog& log,
                                     double requester_score, Tick tick) {
  if (requester_score < config.selectivity_threshold) {
    return {false, DenyReason::BelowSelectivity};
  }
  if (log.served_within(tick, config.rate_limit.window) >= config.rate_limit.max_introductions) {
    return {false, DenyReason::RateLimited};
  }
  log.commit(tick);
  return {true, std::nullopt};
}

std::vector<TenantId> PathResult::introducer_chain() const {
  return {path.rbegin(), path.rend()};
}

QueryEngine::QueryEngine(QueryConfig defaults) : defaults_(std::move(defaults)) {
  validate(defaults_);
}

void QueryEngine::configure(QueryConfig config) {
  validate(config);
  TenantId owner = config.owner;
  configs_.insert_or_assign(std::move(owner), std::move(config));
}

const QueryConfig& QueryEngine::config_for(const TenantId& tenant) const {
  auto it = configs_.find(tenant);
  return it == configs_.end() ? defaults_ : it->second;
}

std::int64_t QueryEngine::served_within_window(const TenantId& intermediary, Tick tick) const {
  auto it = logs_.find(intermediary);
  if (it == logs_.end()) return 0;
  return it->second.served_within(tick, config_for(intermediary).rate_limit.window);
}

bool QueryEngine::has_headroom(const TenantId& tenant, Tick tick) const {
  return served_within_window(tenant, tick) < config_for(tenant).rate_limit.max_introductions;
}

AdmissionDecision QueryEngine::admit_introduction(const TenantId& intermediary,
                                                  double requester_score, Tick tick) {
  return seit::admit_introduction(config_for(intermediary), logs_[intermediary], requester_score,
                                  tick);
}

namespace {

constexpr double kUnbounded = std::numeric_limits<double>::infinity();
constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();

}  // namespace

std::optional<PathResult> QueryEngine::find_introduction_path(const ReputationGraph& graph,
                                                              const TenantId& src,
                                                              const TenantId& dst, Tick tick) {
  const std::size_t s = graph.index_of(src);
  const std::size_t d = graph.index_of(dst);
  if (s == d) throw Error(ErrorCode::InvalidParameter, "source and destination are the same");

  const std::size_t n = graph.tenant_count();
  // Per-tenant policy, looked up on first visit only.
  std::vector<double> threshold(n, -1.0);
  std::vector<char> relays(n);  // may serve as an intermediary
  auto visit = [&](std::size_t i) {
    if (threshold[i] >= 0.0) return;
    const TenantId& id = graph.id_at(i);
    threshold[i] = config_for(id).selectivity_threshold;
    relays[i] = (i != s && i != d && has_headroom(id, tick)) ? 1 : 0;
  };
  auto hop_ok = [&](std::size_t from, std::size_t to, double floor) {
    // `to` holds Edge(to, from) and judges it against its own selectivity.
    if (to == s) return false;
    visit(to);
    if (to != d && !relays[to]) return false;
    const double w = graph.score_at(to, from);
    return w >= threshold[to] && w >= floor;
  };

  // Pass 1: maximum bottleneck (modified Dijkstra).
  std::vector<double> best(n, -1.0);
  best[s] = kUnbounded;
  std::priority_queue<std::pair<double, std::size_t>> frontier;
  frontier.emplace(kUnbounded, s);
  while (!frontier.empty()) {
    auto [width, u] = frontier.top();
    frontier.pop();
    if (width < best[u] || u == d) continue;
    for (std::size_t v : graph.scorers_of(u)) {
      if (!hop_ok(u, v, 0.0)) continue;
      const double b = std::min(width, graph.score_at(v, u));
      if (b > best[v]) {
        best[v] = b;
        frontier.emplace(b, v);
      }
    }
  }
  if (best[d] < 0.0) return std::nullopt;
  const double widest = best[d];

  // Pass 2: hop distance to dst using only hops at least as wide as the
  // optimum.
  std::vector<std::size_t> dist(n, kUnreached);
  dist[d] = 0;
  std::deque<std::size_t> bfs{d};
  while (!bfs.empty()) {
    const std::size_t v = bfs.front();
    bfs.pop_front();
    for (const auto& [u, edge] : graph.edges_from(v)) {
      if (dist[u] != kUnreached || !hop_ok(u, v, widest)) continue;
      visit(u);
      if (u != s && !relays[u]) continue;
      dist[u] = dist[v] + 1;
      if (u != s) bfs.push_back(u);
    }
  }

  // Pass 3: lexicographically smallest shortest path.
  PathResult result;
  result.bottleneck = widest;
  result.accepted = true;
  std::size_t cur = s;
  while (cur != d) {
    std::size_t next = kUnreached;
    for (std::size_t v : graph.scorers_of(cur)) {
      if (dist[v] == kUnreached || dist[v] + 1 != dist[cur] || !hop_ok(cur, v, widest)) continue;
      if (next == kUnreached || graph.id_at(v) < graph.id_at(next)) next = v;
    }
    cur = next;
    if (cur != d) result.path.push_back(graph.id_at(cur));
  }

  for (const TenantId& intermediary : result.path) logs_[intermediary].commit(tick);
  return result;
}

std::vector<std::optional<double>> QueryEngine::bottlenecks_to(const ReputationGraph& graph,
                                                               const TenantId& dst,
                                                               Tick tick) const {
  const std::size_t d = graph.index_of(dst);
  const std::size_t n = graph.tenant_count();
  std::vector<double> best(n, -1.0);
  best[d] = kUnbounded;
  std::priority_queue<std::pair<double, std::size_t>> frontier;
  frontier.emplace(kUnbounded, d);
  while (!frontier.empty()) {
    auto [width, v] = frontier.top();
    frontier.pop();
    if (width < best[v]) continue;
    // Anything that reaches v from behind uses v as the destination or as an
    // intermediary.
    if (v != d && !has_headroom(graph.id_at(v), tick)) continue;
    const double floor = config_for(graph.id_at(v)).selectivity_threshold;
    for (const auto& [u, edge] : graph.edges_from(v)) {
      if (u == d || edge.score < floor) continue;
      const double b = std::min(width, edge.score);
      if (b > best[u]) {
        best[u] = b;
        frontier.emplace(b, u);
      }
    }
  }
  std::vector<std::optional<double>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i != d && best[i] >= 0.0) out[i] = best[i];
  }
  return out;
}

std::vector<Crossing> crossed_thresholds(const std::vector<double>& thresholds, double old_score,
                                         double new_score) {
  std::vector<Crossing> out;
  if (new_score > old_score) {
    for (double t : thresholds) {
      if (old_score < t && t <= new_score) out.push_back({t, Direction::Rising});
    }
  } else if (new_score < old_score) {
    for (auto it = thresholds.rbegin(); it != thresholds.rend(); ++it) {
      if (new_score <= *it && *it < old_score) out.push_back({*it, Direction::Falling});
    }
  }
  return out;
}

std::uint64_t SubscriptionTable::subscribe(const TenantId& subscriber,
                                           std::optional<TenantId> subject_filter,
                                           std::vector<double> thresholds) {
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const double t = thresholds[i];
    if (!std::isfinite(t) || t < 0.0 || t > 1.0) {
      throw Error(ErrorCode::InvalidThresholds, "thresholds must lie in [0, 1]");
    }
    if (i > 0 && !(thresholds[i - 1] < t)) {
      throw Error(ErrorCode::InvalidThresholds, "thresholds must be strictly increasing");
    }
  }
  const std::uint64_t id = next_id_++;
  Key key{subscriber, subject_filter};
  subscriptions_.insert_or_assign(
      std::move(key),
      Entry{id, ThresholdSubscription{subscriber, std::move(subject_filter), std::move(thresholds)}});
  return id;
}

bool SubscriptionTable::unsubscribe(const TenantId& subscriber,
                                    const std::optional<TenantId>& subject_filter) {
  return subscriptions_.erase(Key{subscriber, subject_filter}) > 0;
}

const ThresholdSubscription* SubscriptionTable::find(
    const TenantId& subscriber, const std::optional<TenantId>& subject_filter) const {
  auto it = subscriptions_.find(Key{subscriber, subject_filter});
  return it == subscriptions_.end() ? nullptr : &it->second.subscription;
}

std::vector<CrossingNotification> SubscriptionTable::process_edge_update(
    const TenantId& owner, const TenantId& subject, double old_score, double new_score,
    Tick tick) const {
  const ThresholdSubscription* sub = find(owner, subject);
  if (sub == nullptr) sub = find(owner, std::nullopt);
  if (sub == nullptr) return {};

  std::vector<CrossingNotification> out;
  for (const Crossing& c : crossed_thresholds(sub->thresholds, old_score, new_score)) {
    out.push_back(CrossingNotification{owner, subject, c.threshold, c.direction, new_score, tick});
  }
  return out;
}

}  // namespace seit
