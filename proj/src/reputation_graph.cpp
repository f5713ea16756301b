#include "seit/reputation_graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <utility>

#include "seit/error.hpp"

namespace seit {

namespace {

bool in_unit_interval(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

}  // namespace

ReputationGraph::ReputationGraph(GraphParams params) : params_(params) {
  if (!(std::isfinite(params_.scale) && params_.scale > 0.0 && params_.scale <= 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "introduction scale must lie in (0, 1]");
  }
  if (!(std::isfinite(params_.attenuation) && params_.attenuation > 0.0 &&
        params_.attenuation <= 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "chain attenuation must lie in (0, 1]");
  }
  if (!in_unit_interval(params_.default_global_score)) {
    throw Error(ErrorCode::InvalidParameter, "default global score must lie in [0, 1]");
  }
}

const TenantId& ReputationGraph::register_tenant(TenantId id) {
  if (id.empty()) {
    throw Error(ErrorCode::InvalidParameter, "tenant id must not be empty");
  }
  if (index_.contains(id)) {
    throw Error(ErrorCode::DuplicateTenant, id.str());
  }
  const std::size_t idx = ids_.size();
  index_.emplace(id, idx);
  ids_.push_back(std::move(id));
  out_.emplace_back();
  in_.emplace_back();
  return ids_.back();
}

bool ReputationGraph::has_tenant(const TenantId& id) const { return index_.contains(id); }

std::optional<std::size_t> ReputationGraph::find_index(const TenantId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t ReputationGraph::index_of(const TenantId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(ErrorCode::UnknownTenant, id.str());
  return it->second;
}

double ReputationGraph::score_at(std::size_t owner, std::size_t subject) const {
  return out_.at(owner).at(subject).score;
}

Edge* ReputationGraph::mutable_edge(std::size_t owner, std::size_t subject) {
  auto& row = out_[owner];
  auto it = row.find(subject);
  return it == row.end() ? nullptr : &it->second;
}

const Edge* ReputationGraph::find_edge(const TenantId& owner, const TenantId& subject) const {
  auto o = find_index(owner);
  auto s = find_index(subject);
  if (!o || !s) return nullptr;
  const auto& row = out_[*o];
  auto it = row.find(*s);
  return it == row.end() ? nullptr : &it->second;
}

std::optional<double> ReputationGraph::reputation_of(const TenantId& owner,
                                                     const TenantId& subject) const {
  if (const Edge* e = find_edge(owner, subject)) return e->score;
  return std::nullopt;
}

const Edge& ReputationGraph::establish_edge(const TenantId& acceptor, const TenantId& newcomer,
                                            std::span<const TenantId> chain, Tick tick) {
  const std::size_t a = index_of(acceptor);
  const std::size_t n = index_of(newcomer);
  if (a == n) {
    throw Error(ErrorCode::InvalidChain, "a tenant cannot be introduced to itself");
  }

  std::set<std::size_t> seen;
  std::vector<std::size_t> hops;
  hops.reserve(chain.size());
  for (const TenantId& member : chain) {
    const std::size_t m = index_of(member);
    if (m == a || m == n) {
      throw Error(ErrorCode::InvalidChain, "chain must not contain the acceptor or the newcomer");
    }
    if (!seen.insert(m).second) {
      throw Error(ErrorCode::InvalidChain, "duplicate introducer " + member.str());
    }
    hops.push_back(m);
  }

  double score = params_.default_global_score;
  if (!hops.empty()) {
    const Edge* nearest = mutable_edge(a, hops.front());
    if (nearest == nullptr) {
      throw Error(ErrorCode::MissingIntroducerEdge,
                  acceptor.str() + " has no edge to introducer " + chain.front().str());
    }
    for (std::size_t k = 0; k + 1 < hops.size(); ++k) {
      if (mutable_edge(hops[k], hops[k + 1]) == nullptr) {
        throw Error(ErrorCode::MissingIntroducerEdge,
                    chain[k].str() + " has no edge to introducer " + chain[k + 1].str());
      }
    }
    score = std::clamp(params_.scale * nearest->score, 0.0, 1.0);
  }

  Edge edge{acceptor, newcomer, score,
            IntroductionRecord{std::vector<TenantId>(chain.begin(), chain.end()), tick}, tick};
  auto& row = out_[a];
  auto [it, inserted] = row.insert_or_assign(n, std::move(edge));
  if (inserted) {
    in_[n].push_back(a);
    ++edge_count_;
  }
  return it->second;
}

void ReputationGraph::record_change(Edge& edge, double delta, Tick tick,
                                    FeedbackReceipt& receipt) {
  const double old_score = edge.score;
  edge.score = std::clamp(old_score + delta, 0.0, 1.0);
  edge.last_update = tick;
  receipt.changes.push_back(EdgeChange{edge.owner, edge.subject, old_score, edge.score});
}

FeedbackReceipt ReputationGraph::apply_feedback(const FeedbackEvent& event, double step) {
  if (!std::isfinite(event.q) || event.q < -1.0 || event.q > 1.0) {
    throw Error(ErrorCode::FeedbackOutOfRange, "q must lie in [-1, 1]");
  }
  if (!std::isfinite(step) || step < 0.0) {
    throw Error(ErrorCode::InvalidParameter, "feedback step must be a nonnegative number");
  }
  const auto r = find_index(event.reporter);
  const auto s = find_index(event.subject);
  Edge* direct = (r && s) ? mutable_edge(*r, *s) : nullptr;
  if (direct == nullptr) {
    throw Error(ErrorCode::UnknownEdge, event.reporter.str() + " -> " + event.subject.str());
  }

  FeedbackReceipt receipt;
  const double delta = step * event.q;
  record_change(*direct, delta, event.tick, receipt);

  double factor = 1.0;
  for (const TenantId& introducer : direct->intro.chain) {
    factor *= params_.attenuation;
    const auto i = find_index(introducer);
    if (!i) continue;
    if (Edge* indirect = mutable_edge(*r, *i)) {
      record_change(*indirect, delta * factor, event.tick, receipt);
    }
  }
  log_.push_back(event);
  return receipt;
}

FeedbackReceipt ReputationGraph::propagate_feedback(const FeedbackEvent& event, double step) {
  // Validate everything that can fail up front so that the cascade is
  // all-or-nothing.
  if (!std::isfinite(event.q) || event.q < -1.0 || event.q > 1.0) {
    throw Error(ErrorCode::FeedbackOutOfRange, "q must lie in [-1, 1]");
  }
  if (!std::isfinite(step) || step < 0.0) {
    throw Error(ErrorCode::InvalidParameter, "feedback step must be a nonnegative number");
  }
  if (find_edge(event.reporter, event.subject) == nullptr) {
    throw Error(ErrorCode::UnknownEdge, event.reporter.str() + " -> " + event.subject.str());
  }

  FeedbackReceipt receipt;
  std::set<TenantId> visited{event.reporter};
  std::deque<std::pair<TenantId, double>> pending{{event.reporter, 1.0}};
  while (!pending.empty()) {
    auto [reporter, factor] = std::move(pending.front());
    pending.pop_front();
    const Edge* edge = find_edge(reporter, event.subject);
    if (edge == nullptr) continue;

    // The chain is copied before apply_feedback mutates the edge map.
    const std::vector<TenantId> chain = edge->intro.chain;
    FeedbackEvent hop = event;
    hop.reporter = reporter;
    FeedbackReceipt part = apply_feedback(hop, step * factor);
    receipt.changes.insert(receipt.changes.end(), part.changes.begin(), part.changes.end());

    double hop_factor = factor;
    for (const TenantId& introducer : chain) {
      hop_factor *= params_.attenuation;
      if (visited.insert(introducer).second) pending.emplace_back(introducer, hop_factor);
    }
  }
  return receipt;
}

std::vector<TenantId> ReputationGraph::tenants() const {
  std::vector<TenantId> out = ids_;
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Edge> ReputationGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (const auto& row : out_) {
    for (const auto& [subject, edge] : row) out.push_back(edge);
  }
  std::sort(out.begin(), out.end(), [](const Edge& x, const Edge& y) {
    return std::tie(x.owner, x.subject) < std::tie(y.owner, y.subject);
  });
  return out;
}

std::vector<Edge> ReputationGraph::edges_about(const TenantId& subject) const {
  std::vector<Edge> out;
  const auto s = find_index(subject);
  if (!s) return out;
  for (std::size_t owner : in_[*s]) out.push_back(out_[owner].at(*s));
  std::sort(out.begin(), out.end(),
            [](const Edge& x, const Edge& y) { return x.owner < y.owner; });
  return out;
}

void ReputationGraph::restore_edge(Edge edge) {
  const std::size_t o = index_of(edge.owner);
  const std::size_t s = index_of(edge.subject);
  if (o == s) throw Error(ErrorCode::InvalidChain, "self edge " + edge.owner.str());
  if (!in_unit_interval(edge.score)) {
    throw Error(ErrorCode::InvalidParameter, "edge score outside [0, 1]");
  }
  for (const TenantId& member : edge.intro.chain) index_of(member);
  auto [it, inserted] = out_[o].insert_or_assign(s, std::move(edge));
  if (inserted) {
    in_[s].push_back(o);
    ++edge_count_;
  }
}

}  // namespace seit
