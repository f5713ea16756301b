#include "seit/sim/topology.hpp"

#include <algorithm>
#include <cmath>

namespace seit::sim {

std::vector<TenantId> tenant_ids(std::size_t n) {
  const std::size_t width = std::max<std::size_t>(4, std::to_string(n == 0 ? 0 : n - 1).size());
  std::vector<TenantId> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string digits = std::to_string(i);
    out.emplace_back("t" + std::string(width - digits.size(), '0') + digits);
  }
  return out;
}

std::vector<std::size_t> Topology::attacker_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < attacker.size(); ++i) {
    if (attacker[i]) out.push_back(i);
  }
  return out;
}

namespace {

// k distinct values from [0, n) excluding `skip`, in random order.
std::vector<std::size_t> pick_others(Rng& rng, std::size_t n, std::size_t skip, std::size_t k) {
  std::vector<std::size_t> pool;
  pool.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (i != skip) pool.push_back(i);
  }
  k = std::min(k, pool.size());
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace

Topology build_topology(const ScenarioSpec& spec, Rng& rng) {
  const auto n = static_cast<std::size_t>(spec.n_tenants);
  Topology topo;
  topo.ids = tenant_ids(n);
  topo.quality.assign(n, 0.0);
  topo.attacker.assign(n, 0);
  topo.connections.resize(n);

  const auto attackers = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.attacker_fraction)));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = 0; i < attackers; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(order[i], order[pick(rng)]);
    topo.attacker[order[i]] = 1;
  }

  std::uniform_real_distribution<double> quality(spec.quality_min, spec.quality_max);
  std::uniform_int_distribution<int> degree(spec.degree_min, spec.degree_max);
  for (std::size_t i = 0; i < n; ++i) {
    topo.quality[i] = topo.attacker[i] ? 0.0 : quality(rng);
    topo.connections[i] = pick_others(rng, n, i, static_cast<std::size_t>(degree(rng)));
  }
  return topo;
}

ReputationGraph bootstrap_graph(const Topology& topology, const GraphParams& params) {
  ReputationGraph graph(params);
  for (const TenantId& id : topology.ids) graph.register_tenant(id);
  for (std::size_t i = 0; i < topology.size(); ++i) {
    for (std::size_t j : topology.connections[i]) {
      graph.establish_edge(topology.ids[j], topology.ids[i], {});
    }
  }
  return graph;
}

bool sensor_sample(bool packet_is_bad, double detect_prob, Rng& rng) {
  return packet_is_bad && std::bernoulli_distribution(detect_prob)(rng);
}

double bad_packet_probability(double quality, double careless_scale) {
  if (quality < 0.05) return 1.0;
  if (quality >= 0.5) return 0.0;
  return (0.5 - quality) / 0.5 * careless_scale;
}

}  // namespace seit::sim
