#include <algorithm>
#include <numeric>

#include "seit/error.hpp"
#include "seit/sim/run.hpp"
#include "seit/sim/topology.hpp"

namespace seit::sim {

EquilibriumSummary run_equilibrium(const ScenarioSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  const auto n = static_cast<std::size_t>(spec.n_tenants);
  const dynamics::PairIndex pairs(n);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<dynamics::Behavior> behavior(n, dynamics::Behavior::Good);
  for (int k = 0; k < spec.malicious; ++k) behavior[order[static_cast<std::size_t>(k)]] = dynamics::Behavior::Malicious;

  dynamics::TrajectoryState initial{std::vector<double>(pairs.size()), 0};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (double& r : initial.R) r = unit(rng);

  const dynamics::DynamicsConfig config{spec.alpha, spec.t_max, spec.epsilon, 1};
  dynamics::EquilibriumRun run = dynamics::run_to_equilibrium(
      std::move(initial), pairs, dynamics::AggregateWeights::direct(pairs.size()), behavior, config);

  EquilibriumSummary out;
  for (const dynamics::TrajectoryState& s : run.trajectory) {
    double gg = 0.0, bg = 0.0;
    std::size_t ngg = 0, nbg = 0;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto [i, j] = pairs.pair(p);
      if (behavior[i] != dynamics::Behavior::Good) continue;
      if (behavior[j] == dynamics::Behavior::Good) {
        gg += s.R[p];
        ++ngg;
      } else {
        bg += s.R[p];
        ++nbg;
      }
    }
    out.t.push_back(s.t);
    out.good_at_good.push_back(ngg ? gg / static_cast<double>(ngg) : 0.0);
    out.bad_at_good.push_back(nbg ? bg / static_cast<double>(nbg) : 0.0);
  }
  out.converged = run.report.converged;
  out.t_final = run.report.t_final;
  out.violations = run.report.violations.size();
  out.classified_bad = static_cast<std::size_t>(
      std::count(run.report.classification.begin(), run.report.classification.end(), dynamics::Group::Bad));
  for (dynamics::TrajectoryState& s : run.trajectory) {
    if (s.t % spec.trajectory_stride == 0 || s.t == out.t_final) out.trajectory.push_back(std::move(s));
  }
  for (const TenantId& id : tenant_ids(n)) out.names.push_back(id.str());
  return out;
}

}  // namespace seit::sim
