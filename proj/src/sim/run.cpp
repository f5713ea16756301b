#include "seit/sim/run.hpp"

namespace seit::sim {

std::string_view library_version() noexcept { return "0.1.0"; }

MetricsReport run_scenario(const ScenarioSpec& spec, EventLog* log) {
  MetricsReport report{spec, std::string(library_version()), {}};
  switch (spec.kind) {
    case ScenarioKind::Dos: report.body = run_dos(spec, log); break;
    case ScenarioKind::Middlebox: report.body = run_middlebox(spec, log); break;
    case ScenarioKind::Broker: report.body = run_broker(spec, log); break;
    case ScenarioKind::Equilibrium: report.body = run_equilibrium(spec); break;
  }
  return report;
}

}  // namespace seit::sim
