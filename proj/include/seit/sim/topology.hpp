#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "seit/reputation_graph.hpp"
#include "seit/sim/scenario.hpp"
#include "seit/tenant.hpp"

namespace seit::sim {

using Rng = std::mt19937_64;

// "t0000", "t0001", ... zero padded so that id order equals index order.
std::vector<TenantId> tenant_ids(std::size_t n);

struct Topology {
  std::vector<TenantId> ids;
  std::vector<double> quality;
  std::vector<char> attacker;
  // connections[i] = tenants i initiated a bootstrap connection to.
  std::vector<std::vector<std::size_t>> connections;

  std::size_t size() const noexcept { return ids.size(); }
  std::vector<std::size_t> attacker_indices() const;
};

// Every tenant initiates degree_min..degree_max connections to distinct
// others. floor(n * attacker_fraction) tenants (at least one) are attackers
// with quality 0; the rest draw quality uniformly from the quality range.
Topology build_topology(const ScenarioSpec& spec, Rng& rng);

// Registers every tenant and adds Edge(j, i) at the default score for each
// bootstrap connection i -> j (the acceptor scores the initiator).
ReputationGraph bootstrap_graph(const Topology& topology, const GraphParams& params);

// One sensor observation. Bad packets are flagged with probability
// detect_prob; good packets never are.
bool sensor_sample(bool packet_is_bad, double detect_prob, Rng& rng);

// Probability that a packet from a tenant of quality q is bad: 1 below 0.05,
// 0 from 0.5 up, and (0.5 - q) / 0.5 * careless_scale in between.
double bad_packet_probability(double quality, double careless_scale);

}  // namespace seit::sim
