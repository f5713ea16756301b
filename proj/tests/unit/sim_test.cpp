#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "seit/error.hpp"
#include "seit/sim/run.hpp"
#include "seit/sim/topology.hpp"

using namespace seit;
using namespace seit::sim;

namespace {

ScenarioSpec dos_spec(int n, std::uint64_t seed) {
  ScenarioSpec s = default_spec(ScenarioKind::Dos, seed);
  s.n_tenants = n;
  return s;
}

void expect_code(ErrorCode code, const std::function<void()>& f) {
  try {
    f();
    ADD_FAILURE() << "no error thrown";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace

TEST(ScenarioSpec, ParsesWithDefaultsPerKind) {
  const ScenarioSpec s = parse_spec(R"({"kind": "broker", "seed": 4})");
  EXPECT_EQ(s.kind, ScenarioKind::Broker);
  EXPECT_EQ(s.seed, 4u);
  EXPECT_EQ(s.n_tenants, 1024);
  EXPECT_EQ(s.broker_selection_weights, (std::vector<double>{0.85, 0.10, 0.05}));
  EXPECT_EQ(parse_spec(R"({"kind": "equilibrium", "seed": 0})").n_tenants, 100);
}

TEST(ScenarioSpec, JsonRoundTrip) {
  ScenarioSpec s = dos_spec(77, 12);
  s.detect_prob = 0.75;
  s.broker_qualities = {0.1, 0.9};
  s.broker_providers = 1;
  EXPECT_EQ(parse_spec(spec_to_json(s)), s);
}

TEST(ScenarioSpec, RejectsBadInput) {
  for (const char* text : {
           "not json",
           "[1, 2]",
           R"({"seed": 1})",
           R"({"kind": "dos"})",
           R"({"kind": "warp", "seed": 1})",
           R"({"kind": "dos", "seed": -1})",
           R"({"kind": "dos", "seed": 1, "colour": 3})",
           R"({"kind": "dos", "seed": 1, "n_tenants": "many"})",
           R"({"kind": "dos", "seed": 1, "n_tenants": 1.5})",
           R"({"kind": "dos", "seed": 1, "n_tenants": 1})",
           R"({"kind": "dos", "seed": 1, "degree_min": 0})",
           R"({"kind": "dos", "seed": 1, "degree_min": 4, "degree_max": 2})",
           R"({"kind": "dos", "seed": 1, "detect_prob": 1.5})",
           R"({"kind": "dos", "seed": 1, "block_threshold": 0.9})",
           R"({"kind": "equilibrium", "seed": 1, "alpha": 1.0})",
           R"({"kind": "broker", "seed": 1, "n_tenants": 100})",
       }) {
    expect_code(ErrorCode::InvalidSpec, [&] { parse_spec(text); });
  }
}

TEST(Topology, SameSeedSameGraph) {
  Rng a(7), b(7);
  const ScenarioSpec spec = dos_spec(32, 7);
  const Topology ta = build_topology(spec, a);
  const Topology tb = build_topology(spec, b);
  EXPECT_EQ(bootstrap_graph(ta, {}).edges(), bootstrap_graph(tb, {}).edges());
  EXPECT_EQ(ta.quality, tb.quality);
}

TEST(Topology, AttackerCountIsFloorWithMinimumOne) {
  Rng rng(1);
  const Topology big = build_topology(dos_spec(1024, 1), rng);
  const auto attackers = big.attacker_indices();
  EXPECT_EQ(attackers.size(), 30u);
  for (std::size_t a : attackers) EXPECT_EQ(big.quality[a], 0.0);
  Rng rng2(1);
  EXPECT_EQ(build_topology(dos_spec(32, 1), rng2).attacker_indices().size(), 1u);
}

TEST(Topology, DegreesAndQualitiesWithinRange) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const ScenarioSpec spec = dos_spec(300, seed);
    const Topology t = build_topology(spec, rng);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto& out = t.connections[i];
      EXPECT_GE(out.size(), 1u);
      EXPECT_LE(out.size(), 5u);
      EXPECT_EQ(std::set<std::size_t>(out.begin(), out.end()).size(), out.size());
      EXPECT_EQ(std::count(out.begin(), out.end(), i), 0);
      if (!t.attacker[i]) {
        EXPECT_GE(t.quality[i], 0.1);
        EXPECT_LE(t.quality[i], 1.0);
      }
    }
    // Each connection i -> j gives the acceptor j an edge about i.
    const ReputationGraph g = bootstrap_graph(t, {});
    for (std::size_t i = 0; i < t.size(); ++i) {
      for (std::size_t j : t.connections[i]) {
        EXPECT_EQ(g.reputation_of(t.ids[j], t.ids[i]), 0.5);
      }
    }
  }
}

TEST(Sensor, DetectsOnlyBadPackets) {
  Rng rng(3);
  EXPECT_TRUE(sensor_sample(true, 1.0, rng));
  for (int i = 0; i < 1000; ++i) EXPECT_FALSE(sensor_sample(false, 1.0, rng));
  EXPECT_FALSE(sensor_sample(true, 0.0, rng));
}

TEST(Sensor, BinomialDetectionCount) {
  Rng rng(2024);
  int detected = 0;
  for (int i = 0; i < 10'000; ++i) detected += sensor_sample(true, 0.9, rng) ? 1 : 0;
  const double sigma = std::sqrt(10'000 * 0.9 * 0.1);
  EXPECT_LE(std::abs(detected - 9000), 3 * sigma) << detected;
}

TEST(Traffic, BadPacketProbabilityByQuality) {
  EXPECT_EQ(bad_packet_probability(0.0, 0.2), 1.0);
  EXPECT_EQ(bad_packet_probability(0.049, 0.2), 1.0);
  EXPECT_NEAR(bad_packet_probability(0.05, 0.2), 0.18, 1e-15);
  EXPECT_NEAR(bad_packet_probability(0.25, 0.2), 0.10, 1e-15);
  EXPECT_EQ(bad_packet_probability(0.5, 0.2), 0.0);
  EXPECT_EQ(bad_packet_probability(0.9, 0.2), 0.0);
}

TEST(Dos, BaselineLetsMostAttackPacketsThrough) {
  const DosReport r = run_dos(dos_spec(256, 3));
  ASSERT_EQ(r.variants.size(), 3u);
  EXPECT_EQ(r.variants[0].name, "baseline");
  EXPECT_GE(1.0 - r.variants[0].attack.blocked_fraction(), 0.9);
}

TEST(Dos, PacketsAreConservedAndSeitBlocksMore) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const DosReport r = run_dos(dos_spec(128, seed));
    for (const DosVariant& v : r.variants) {
      EXPECT_TRUE(v.attack.conserved()) << v.name;
      EXPECT_TRUE(v.normal.conserved()) << v.name;
      EXPECT_GT(v.attack.generated, 0) << v.name;
    }
    EXPECT_EQ(r.variants[0].attack.generated, r.variants[1].attack.generated);
    EXPECT_GT(r.variants[1].attack.blocked_fraction(), r.variants[0].attack.blocked_fraction());
    EXPECT_GT(r.variants[2].attack.blocked_fraction(), r.variants[0].attack.blocked_fraction());
  }
}

TEST(Dos, AttackVolumeMatchesPlan) {
  const ScenarioSpec spec = dos_spec(64, 9);
  const DosReport r = run_dos(spec);
  // One attacker, floor(0.25 * 63) = 15 targets, 100 packets each.
  EXPECT_EQ(r.variants[0].attack.generated, 15 * 100);
  EXPECT_EQ(r.variants[0].connections_approved + r.variants[0].connections_rejected, 15);
}

TEST(Dos, DeterministicReport) {
  const ScenarioSpec spec = dos_spec(96, 5);
  EXPECT_EQ(report_to_json(run_scenario(spec)), report_to_json(run_scenario(spec)));
  ScenarioSpec other = spec;
  other.seed = 6;
  EXPECT_NE(report_to_json(run_scenario(spec)), report_to_json(run_scenario(other)));
}

TEST(Middlebox, InstanceArithmeticAndEventLog) {
  ScenarioSpec spec = default_spec(ScenarioKind::Middlebox, 2);
  spec.n_tenants = 256;
  spec.middlebox_budget = 40;
  EventLog log;
  const MiddleboxReport r = run_middlebox(spec, &log);
  ASSERT_EQ(r.variants.size(), 4u);

  std::map<std::string, std::map<std::int64_t, std::int64_t>> load;
  for (const EventLog::Row& row : log.rows()) {
    if (row.event == "mb_arrival") load[row.variant][std::stoll(row.detail)]++;
  }
  for (const MiddleboxVariant& v : r.variants) {
    EXPECT_TRUE(v.attack.conserved()) << v.name;
    EXPECT_TRUE(v.normal.conserved()) << v.name;
    ASSERT_EQ(v.interval_load.size(), v.instances.size());
    std::int64_t total = 0;
    for (std::size_t k = 0; k < v.interval_load.size(); ++k) {
      const auto it = load[v.name].find(static_cast<std::int64_t>(k));
      EXPECT_EQ(v.interval_load[k], it == load[v.name].end() ? 0 : it->second);
      const std::int64_t expected = v.autoscale ? (v.interval_load[k] + 9) / 10 : 40;
      EXPECT_EQ(v.instances[k], expected);
      total += v.instances[k];
    }
    EXPECT_EQ(total, v.instance_intervals);
    if (v.autoscale) EXPECT_EQ(v.unprocessed, 0) << v.name;
  }
  EXPECT_GT(r.variants[1].unprocessed, 0);  // no_seit_fixed saturates
}

TEST(Broker, SelectionsOrderedByQuality) {
  const BrokerReport r = run_broker(default_spec(ScenarioKind::Broker, 1));
  ASSERT_EQ(r.classes.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(r.classes[k].providers, 128);
  for (std::size_t k = 1; k < 4; ++k) {
    EXPECT_GT(r.classes[k].selections, r.classes[k - 1].selections) << r.classes[k].quality;
  }
  std::int64_t total = 0;
  for (const BrokerClass& c : r.classes) total += c.selections;
  EXPECT_LE(total, r.searches);
}

TEST(Broker, RequiresMatchingPopulation) {
  ScenarioSpec spec = default_spec(ScenarioKind::Broker, 1);
  spec.broker_users = 10;
  expect_code(ErrorCode::InvalidSpec, [&] { run_broker(spec); });
}

TEST(Equilibrium, MaliciousTenantsLoseReputation) {
  const EquilibriumSummary r = run_equilibrium(default_spec(ScenarioKind::Equilibrium, 4));
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.violations, 0u);
  EXPECT_EQ(r.classified_bad, 10u);
  EXPECT_LT(r.bad_at_good.back(), 0.05);
  EXPECT_GE(r.good_at_good.back(), r.good_at_good.front() - 1e-12);
  EXPECT_EQ(r.t.front(), 0);
  EXPECT_EQ(r.t.back(), r.t_final);
  EXPECT_EQ(r.trajectory.back().t, r.t_final);
}

TEST(Report, CsvHeadersPerKind) {
  ScenarioSpec eq = default_spec(ScenarioKind::Equilibrium, 1);
  eq.n_tenants = 10;
  eq.malicious = 2;
  std::ostringstream csv;
  write_report_csv(csv, run_scenario(eq));
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "t,good_at_good,bad_at_good");

  std::ostringstream dos;
  write_report_csv(dos, run_scenario(dos_spec(32, 1)));
  EXPECT_EQ(dos.str().substr(0, dos.str().find('\n')),
            "variant,population,generated,reached,blocked_at_source,dropped_by_policy,"
            "filtered_by_middlebox,blocked_fraction");
  const std::string text = dos.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 7);
}

TEST(Report, JsonCarriesReproductionMetadata) {
  const std::string json = report_to_json(run_scenario(dos_spec(32, 11)));
  EXPECT_NE(json.find("\"seed\": 11"), std::string::npos);
  EXPECT_NE(json.find("\"version\": \"0.1.0\""), std::string::npos);
  EXPECT_NE(json.find("\"normal_packets_scope\": \"per_connection\""), std::string::npos);
  EXPECT_EQ(parse_spec(spec_to_json(dos_spec(32, 11))), dos_spec(32, 11));
}
