#include <algorithm>
#include <numeric>

#include "seit/error.hpp"
#include "seit/manager.hpp"
#include "seit/policy.hpp"
#include "seit/sim/run.hpp"
#include "seit/sim/topology.hpp"

namespace seit::sim {

namespace {

struct Candidate {
  std::size_t provider;
  double score;
  bool known;
};

}  // namespace

BrokerReport run_broker(const ScenarioSpec& spec, EventLog* log) {
  validate(spec);
  if (spec.kind != ScenarioKind::Broker) {
    throw Error(ErrorCode::InvalidSpec, "run_broker needs a broker spec");
  }
  Rng rng(spec.seed);
  const auto n = static_cast<std::size_t>(spec.n_tenants);
  const std::vector<TenantId> ids = tenant_ids(n);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_providers = static_cast<std::size_t>(spec.broker_providers);
  const auto n_hybrids = static_cast<std::size_t>(spec.broker_hybrids);
  std::vector<char> provides(n, 0), uses(n, 0);
  std::vector<std::size_t> providers, searchers;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = order[k];
    provides[i] = k < n_providers + n_hybrids;
    uses[i] = k >= n_providers;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (provides[i]) providers.push_back(i);
    if (uses[i]) searchers.push_back(i);
  }

  // Equal-sized quality classes, randomly assigned.
  std::vector<double> quality(n, 0.0);
  std::vector<std::size_t> shuffled = providers;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const std::size_t classes = spec.broker_qualities.size();
  for (std::size_t k = 0; k < shuffled.size(); ++k) quality[shuffled[k]] = spec.broker_qualities[k % classes];

  ManagerConfig config{GraphParams{spec.introduction_scale, spec.chain_attenuation, spec.default_score},
                       QueryConfig{TenantId{}, spec.selectivity_threshold, RateLimit{}}, spec.feedback_step};
  Manager manager(config);
  ReputationGraph graph(config.graph);
  for (const TenantId& id : ids) graph.register_tenant(id);
  std::vector<std::vector<std::size_t>> active(n);
  std::uniform_int_distribution<int> degree(spec.degree_min, spec.degree_max);
  for (std::size_t u : searchers) {
    std::vector<std::size_t> pool;
    for (std::size_t p : providers) {
      if (p != u) pool.push_back(p);
    }
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(degree(rng)), pool.size());
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
      graph.establish_edge(ids[u], ids[pool[i]], {});
      graph.establish_edge(ids[pool[i]], ids[u], {});
      active[u].push_back(pool[i]);
    }
  }
  manager.load(std::move(graph), {});

  const Tick step = spec.broker_request_interval_ms;
  const Tick slots = std::max<Tick>(1, spec.broker_search_period_ms / step);
  std::uniform_int_distribution<Tick> jitter(0, slots - 1);
  std::vector<Tick> next_search(n, 0);
  for (std::size_t u : searchers) next_search[u] = spec.broker_search_period_ms + jitter(rng) * step;

  BrokerReport report;
  std::vector<std::int64_t> selections(n, 0);
  const std::size_t top = spec.broker_selection_weights.size();

  auto send = [&](const protocol::Message& m, const TenantId& sender, Tick t) {
    for (const Delivery& d : manager.handle(sender, m, t)) {
      if (const auto* err = std::get_if<protocol::ErrorMsg>(&d.message)) {
        throw Error(ErrorCode::InvalidSpec, "broker step rejected: " + err->message);
      }
    }
  };

  auto search = [&](std::size_t u, Tick t) {
    report.searches++;
    const ReputationGraph& g = manager.graph();
    const auto reach = manager.queries().bottlenecks_to(g, ids[u], t);
    std::vector<Candidate> ranked;
    for (std::size_t p : providers) {
      if (p == u) continue;
      Candidate c{p, 0.0, false};
      if (auto direct = g.reputation_of(ids[u], ids[p])) {
        c.score = *direct;
        c.known = true;
      } else if (reach[p]) {
        c.score = spec.introduction_scale * *reach[p];
      } else {
        continue;
      }
      if (c.score >= spec.broker_min_score) ranked.push_back(c);
    }
    // The broker component re-ranks by the user's reputation view.
    ShimSpec broker_spec;
    broker_spec.kind = ComponentKind::Broker;
    broker_spec.owner = ids[u];
    Shim broker(broker_spec);
    for (Candidate& c : ranked) {
      c.score = std::get<Rerank>(broker.inbound(ReputationUpdate{ids[u], ids[c.provider], c.score, t})).score;
    }
    std::sort(ranked.begin(), ranked.end(), [](const Candidate& a, const Candidate& b) {
      return a.score != b.score ? a.score > b.score : a.provider < b.provider;
    });
    if (ranked.empty()) return;
    ranked.resize(std::min(ranked.size(), top));
    std::vector<double> weights(spec.broker_selection_weights.begin(),
                                spec.broker_selection_weights.begin() + static_cast<std::ptrdiff_t>(ranked.size()));
    if (std::accumulate(weights.begin(), weights.end(), 0.0) <= 0.0) return;
    const Candidate chosen = ranked[std::discrete_distribution<std::size_t>(weights.begin(), weights.end())(rng)];
    selections[chosen.provider]++;
    if (log != nullptr) log->record(t, "broker", "select", ids[u], ids[chosen.provider]);
    if (!chosen.known) {
      bool approved = false;
      for (const Delivery& d : manager.handle(
               ids[chosen.provider], protocol::ConnectRequest{ids[chosen.provider], ids[u], std::nullopt}, t)) {
        approved = approved || std::holds_alternative<protocol::ConnectApprove>(d.message);
      }
      if (!approved) return;
      report.introductions++;
    }
    active[u] = {chosen.provider};
  };

  for (Tick t = 0; t < spec.broker_duration_ms; t += step) {
    for (std::size_t u : searchers) {
      if (t >= next_search[u]) {
        search(u, t);
        next_search[u] += spec.broker_search_period_ms;
      }
      for (std::size_t p : active[u]) {
        report.requests++;
        const bool answered = std::bernoulli_distribution(quality[p])(rng);
        if (answered) report.responses++;
        const double q = answered ? spec.broker_response_feedback : -spec.broker_response_feedback;
        send(protocol::Feedback{ids[u], ids[p], q, std::string(answered ? "response" : "no-response"), std::nullopt},
             ids[u], t);
      }
    }
  }

  for (double q : spec.broker_qualities) {
    if (std::any_of(report.classes.begin(), report.classes.end(), [&](const BrokerClass& c) { return c.quality == q; })) {
      continue;
    }
    report.classes.push_back(BrokerClass{q, 0, 0});
  }
  std::sort(report.classes.begin(), report.classes.end(),
            [](const BrokerClass& a, const BrokerClass& b) { return a.quality < b.quality; });
  for (std::size_t p : providers) {
    for (BrokerClass& c : report.classes) {
      if (c.quality == quality[p]) {
        c.providers++;
        c.selections += selections[p];
      }
    }
  }
  return report;
}

}  // namespace seit::sim
