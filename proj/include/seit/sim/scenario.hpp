#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace seit::sim {

enum class ScenarioKind { Dos, Middlebox, Broker, Equilibrium };
std::string_view to_string(ScenarioKind kind) noexcept;

// Declarative experiment description. Times are in simulated milliseconds
// (one tick each). Every field has a JSON key of the same name; only "kind"
// and "seed" are mandatory.
struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::Dos;
  std::uint64_t seed = 0;
  int n_tenants = 256;

  // Graph construction.
  double attacker_fraction = 0.03;
  int degree_min = 1;
  int degree_max = 5;
  double quality_min = 0.1;
  double quality_max = 1.0;

  // Sensor and traffic.
  double detect_prob = 0.9;
  double careless_scale = 0.2;
  std::int64_t normal_interval_ms = 100;
  std::int64_t attacker_interval_ms = 10;
  int normal_packets = 50;
  int attacker_packets = 100;
  double attacker_target_fraction = 0.25;
  std::int64_t start_spread_ms = 30'000;

  // Reputation.
  double feedback_step = 0.2;
  double bad_feedback = -0.5;
  double good_feedback = 0.05;
  double block_threshold = 0.2;
  double bypass_threshold = 0.8;
  double introduction_scale = 0.5;
  double chain_attenuation = 0.5;
  double default_score = 0.5;
  double selectivity_threshold = 0.3;
  std::int64_t rate_limit_max = 3;
  std::int64_t rate_limit_window_ms = 600'000;
  int baseline_block_after = 5;

  // Middlebox.
  int middlebox_capacity_pps = 10;
  std::int64_t middlebox_interval_ms = 1'000;
  int middlebox_budget = 200;

  // Broker.
  int broker_providers = 256;
  int broker_hybrids = 256;
  int broker_users = 512;
  std::vector<double> broker_qualities{0.2, 0.4, 0.6, 0.8};
  std::int64_t broker_search_period_ms = 20'000;
  std::int64_t broker_duration_ms = 120'000;
  std::int64_t broker_request_interval_ms = 1'000;
  std::vector<double> broker_selection_weights{0.85, 0.10, 0.05};
  double broker_response_feedback = 0.1;
  double broker_min_score = 0.3;

  // Equilibrium.
  double alpha = 0.1;
  int malicious = 10;
  std::int64_t t_max = 200;
  double epsilon = 1e-9;
  std::int64_t trajectory_stride = 10;

  friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

// Throws InvalidSpec on malformed JSON, unknown keys, or invalid values.
ScenarioSpec parse_spec(std::string_view json_text);
std::string spec_to_json(const ScenarioSpec& spec);
void validate(const ScenarioSpec& spec);

// Defaults for a kind (n_tenants 1024 for middlebox and broker, 100 for
// equilibrium).
ScenarioSpec default_spec(ScenarioKind kind, std::uint64_t seed);

}  // namespace seit::sim
