#include "seit/sim/scenario.hpp"

#include <cmath>
#include <functional>
#include <json.hpp>
#include <map>

#include "seit/error.hpp"

namespace seit::sim {

namespace {

using nlohmann::ordered_json;

[[noreturn]] void invalid(const std::string& why) { throw Error(ErrorCode::InvalidSpec, why); }

constexpr std::pair<ScenarioKind, std::string_view> kKinds[] = {
    {ScenarioKind::Dos, "dos"},
    {ScenarioKind::Middlebox, "middlebox"},
    {ScenarioKind::Broker, "broker"},
    {ScenarioKind::Equilibrium, "equilibrium"},
};

ScenarioKind kind_from(std::string_view s) {
  for (const auto& [k, name] : kKinds) {
    if (name == s) return k;
  }
  invalid("unknown kind '" + std::string(s) + "'");
}

// One accessor pair per field keeps parsing and printing in sync.
struct Field {
  std::function<void(ScenarioSpec&, const ordered_json&)> read;
  std::function<ordered_json(const ScenarioSpec&)> write;
};

template <typename T>
Field field(T ScenarioSpec::*member) {
  return Field{[member](ScenarioSpec& s, const ordered_json& v) { s.*member = v.get<T>(); },
               [member](const ScenarioSpec& s) { return ordered_json(s.*member); }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"n_tenants", field(&ScenarioSpec::n_tenants)},
      {"attacker_fraction", field(&ScenarioSpec::attacker_fraction)},
      {"degree_min", field(&ScenarioSpec::degree_min)},
      {"degree_max", field(&ScenarioSpec::degree_max)},
      {"quality_min", field(&ScenarioSpec::quality_min)},
      {"quality_max", field(&ScenarioSpec::quality_max)},
      {"detect_prob", field(&ScenarioSpec::detect_prob)},
      {"careless_scale", field(&ScenarioSpec::careless_scale)},
      {"normal_interval_ms", field(&ScenarioSpec::normal_interval_ms)},
      {"attacker_interval_ms", field(&ScenarioSpec::attacker_interval_ms)},
      {"normal_packets", field(&ScenarioSpec::normal_packets)},
      {"attacker_packets", field(&ScenarioSpec::attacker_packets)},
      {"attacker_target_fraction", field(&ScenarioSpec::attacker_target_fraction)},
      {"start_spread_ms", field(&ScenarioSpec::start_spread_ms)},
      {"feedback_step", field(&ScenarioSpec::feedback_step)},
      {"bad_feedback", field(&ScenarioSpec::bad_feedback)},
      {"good_feedback", field(&ScenarioSpec::good_feedback)},
      {"block_threshold", field(&ScenarioSpec::block_threshold)},
      {"bypass_threshold", field(&ScenarioSpec::bypass_threshold)},
      {"introduction_scale", field(&ScenarioSpec::introduction_scale)},
      {"chain_attenuation", field(&ScenarioSpec::chain_attenuation)},
      {"default_score", field(&ScenarioSpec::default_score)},
      {"selectivity_threshold", field(&ScenarioSpec::selectivity_threshold)},
      {"rate_limit_max", field(&ScenarioSpec::rate_limit_max)},
      {"rate_limit_window_ms", field(&ScenarioSpec::rate_limit_window_ms)},
      {"baseline_block_after", field(&ScenarioSpec::baseline_block_after)},
      {"middlebox_capacity_pps", field(&ScenarioSpec::middlebox_capacity_pps)},
      {"middlebox_interval_ms", field(&ScenarioSpec::middlebox_interval_ms)},
      {"middlebox_budget", field(&ScenarioSpec::middlebox_budget)},
      {"broker_providers", field(&ScenarioSpec::broker_providers)},
      {"broker_hybrids", field(&ScenarioSpec::broker_hybrids)},
      {"broker_users", field(&ScenarioSpec::broker_users)},
      {"broker_qualities", field(&ScenarioSpec::broker_qualities)},
      {"broker_search_period_ms", field(&ScenarioSpec::broker_search_period_ms)},
      {"broker_duration_ms", field(&ScenarioSpec::broker_duration_ms)},
      {"broker_request_interval_ms", field(&ScenarioSpec::broker_request_interval_ms)},
      {"broker_selection_weights", field(&ScenarioSpec::broker_selection_weights)},
      {"broker_response_feedback", field(&ScenarioSpec::broker_response_feedback)},
      {"broker_min_score", field(&ScenarioSpec::broker_min_score)},
      {"alpha", field(&ScenarioSpec::alpha)},
      {"malicious", field(&ScenarioSpec::malicious)},
      {"t_max", field(&ScenarioSpec::t_max)},
      {"epsilon", field(&ScenarioSpec::epsilon)},
      {"trajectory_stride", field(&ScenarioSpec::trajectory_stride)},
  };
  return table;
}

bool unit(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

}  // namespace

std::string_view to_string(ScenarioKind kind) noexcept {
  for (const auto& [k, name] : kKinds) {
    if (k == kind) return name;
  }
  return "dos";
}

ScenarioSpec default_spec(ScenarioKind kind, std::uint64_t seed) {
  ScenarioSpec s;
  s.kind = kind;
  s.seed = seed;
  if (kind == ScenarioKind::Middlebox || kind == ScenarioKind::Broker) s.n_tenants = 1024;
  if (kind == ScenarioKind::Equilibrium) s.n_tenants = 100;
  return s;
}

ScenarioSpec parse_spec(std::string_view json_text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    invalid(e.what());
  }
  if (!doc.is_object()) invalid("spec must be a JSON object");
  if (!doc.contains("kind") || !doc["kind"].is_string()) invalid("missing string field 'kind'");
  if (!doc.contains("seed") || !doc["seed"].is_number_integer() ||
      (doc["seed"].is_number_integer() && !doc["seed"].is_number_unsigned() && doc["seed"].get<std::int64_t>() < 0)) {
    invalid("missing nonnegative integer field 'seed'");
  }
  ScenarioSpec spec = default_spec(kind_from(doc["kind"].get<std::string>()), doc["seed"].get<std::uint64_t>());
  std::map<std::string, const Field*> lookup;
  for (const auto& [name, f] : fields()) lookup[name] = &f;
  for (const auto& [key, value] : doc.items()) {
    if (key == "kind" || key == "seed") continue;
    auto it = lookup.find(key);
    if (it == lookup.end()) invalid("unknown field '" + key + "'");
    const ordered_json expected = it->second->write(spec);
    const bool type_ok = expected.is_array() ? value.is_array()
                         : expected.is_number_integer() ? value.is_number_integer()
                                                        : value.is_number();
    if (!type_ok) invalid("field '" + key + "' has the wrong type");
    try {
      it->second->read(spec, value);
    } catch (const nlohmann::json::exception&) {
      invalid("field '" + key + "' has the wrong type");
    }
  }
  validate(spec);
  return spec;
}

std::string spec_to_json(const ScenarioSpec& spec) {
  ordered_json doc;
  doc["kind"] = to_string(spec.kind);
  doc["seed"] = spec.seed;
  for (const auto& [name, f] : fields()) doc[name] = f.write(spec);
  return doc.dump(2);
}

void validate(const ScenarioSpec& s) {
  auto require = [](bool ok, const char* what) {
    if (!ok) invalid(what);
  };
  require(s.n_tenants >= 2, "n_tenants must be >= 2");
  require(unit(s.attacker_fraction), "attacker_fraction must lie in [0, 1]");
  require(s.degree_min >= 1 && s.degree_min <= s.degree_max, "degree range must satisfy 1 <= min <= max");
  require(s.degree_max < s.n_tenants, "degree_max must be below n_tenants");
  require(unit(s.quality_min) && unit(s.quality_max) && s.quality_min <= s.quality_max,
          "quality range must lie in [0, 1]");
  require(unit(s.detect_prob), "detect_prob must lie in [0, 1]");
  require(unit(s.careless_scale), "careless_scale must lie in [0, 1]");
  require(s.normal_interval_ms > 0 && s.attacker_interval_ms > 0, "rates must be > 0");
  require(s.normal_packets > 0 && s.attacker_packets > 0, "packet counts must be > 0");
  require(unit(s.attacker_target_fraction), "attacker_target_fraction must lie in [0, 1]");
  require(s.start_spread_ms >= 1, "start_spread_ms must be >= 1");
  require(std::isfinite(s.feedback_step) && s.feedback_step >= 0.0, "feedback_step must be >= 0");
  require(s.bad_feedback >= -1.0 && s.bad_feedback <= 1.0, "bad_feedback must lie in [-1, 1]");
  require(s.good_feedback >= -1.0 && s.good_feedback <= 1.0, "good_feedback must lie in [-1, 1]");
  require(unit(s.block_threshold) && unit(s.bypass_threshold) && s.block_threshold < s.bypass_threshold,
          "thresholds must satisfy 0 <= block < bypass <= 1");
  require(s.block_threshold > 0.0 && s.bypass_threshold < 1.0, "thresholds must be interior");
  require(s.introduction_scale > 0.0 && s.introduction_scale <= 1.0, "introduction_scale must lie in (0, 1]");
  require(s.chain_attenuation > 0.0 && s.chain_attenuation <= 1.0, "chain_attenuation must lie in (0, 1]");
  require(unit(s.default_score), "default_score must lie in [0, 1]");
  require(unit(s.selectivity_threshold), "selectivity_threshold must lie in [0, 1]");
  require(s.rate_limit_max >= 0 && s.rate_limit_window_ms >= 1, "invalid rate limit");
  require(s.baseline_block_after >= 1, "baseline_block_after must be >= 1");
  require(s.middlebox_capacity_pps >= 1 && s.middlebox_interval_ms >= 1 && s.middlebox_budget >= 0,
          "invalid middlebox settings");
  require(s.broker_providers >= 0 && s.broker_hybrids >= 0 && s.broker_users >= 0 &&
              s.broker_providers + s.broker_hybrids >= 1 && s.broker_users + s.broker_hybrids >= 1,
          "broker needs providers and users");
  require(!s.broker_qualities.empty(), "broker_qualities must not be empty");
  for (double q : s.broker_qualities) require(unit(q), "broker_qualities must lie in [0, 1]");
  require(s.broker_search_period_ms >= 1 && s.broker_duration_ms >= 1 && s.broker_request_interval_ms >= 1,
          "broker periods must be >= 1");
  require(!s.broker_selection_weights.empty(), "broker_selection_weights must not be empty");
  double total = 0.0;
  for (double w : s.broker_selection_weights) {
    require(std::isfinite(w) && w >= 0.0, "selection weights must be >= 0");
    total += w;
  }
  require(total > 0.0, "selection weights must not all be 0");
  require(unit(s.broker_response_feedback), "broker_response_feedback must lie in [0, 1]");
  require(unit(s.broker_min_score), "broker_min_score must lie in [0, 1]");
  require(s.alpha > 0.0 && s.alpha < 1.0, "alpha must lie in (0, 1)");
  require(s.malicious >= 0 && s.malicious <= s.n_tenants, "malicious must lie in [0, n_tenants]");
  require(s.t_max >= 0 && s.epsilon > 0.0 && s.trajectory_stride >= 1, "invalid equilibrium settings");
  if (s.kind == ScenarioKind::Broker) {
    require(s.broker_providers + s.broker_hybrids + s.broker_users == s.n_tenants,
            "broker population must add up to n_tenants");
  }
}

}  // namespace seit::sim
