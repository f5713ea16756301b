#pragma once

#include <string_view>

#include "seit/sim/metrics.hpp"
#include "seit/sim/scenario.hpp"

namespace seit::sim {

std::string_view library_version() noexcept;

// Dispatches on spec.kind. Deterministic for a fixed (spec, seed).
MetricsReport run_scenario(const ScenarioSpec& spec, EventLog* log = nullptr);

// Variants "baseline" (no reputation; each victim refuses a sender only after
// it has locally detected baseline_block_after bad packets from it),
// "seit_sequential" and "seit_parallel".
DosReport run_dos(const ScenarioSpec& spec, EventLog* log = nullptr);

// {no_seit, seit} x {autoscale, fixed}. Without reputation every packet goes
// through the middlebox; with it scores below block_threshold are blocked,
// scores from bypass_threshold up skip the middlebox.
MiddleboxReport run_middlebox(const ScenarioSpec& spec, EventLog* log = nullptr);

BrokerReport run_broker(const ScenarioSpec& spec, EventLog* log = nullptr);

EquilibriumSummary run_equilibrium(const ScenarioSpec& spec);

}  // namespace seit::sim
