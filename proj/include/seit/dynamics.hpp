#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace seit::dynamics {

// Dense numbering of the ordered pairs (i, j), i != j, over n tenants.
class PairIndex {
 public:
  explicit PairIndex(std::size_t tenants);

  std::size_t tenants() const noexcept { return n_; }
  std::size_t size() const noexcept { return n_ * (n_ - 1); }
  std::size_t index(std::size_t owner, std::size_t subject) const;
  std::pair<std::size_t, std::size_t> pair(std::size_t index) const;

 private:
  std::size_t n_;
};

struct WeightEntry {
  std::size_t source;  // contributing pair
  double weight;
};

// Row-stochastic sparse matrix: row p lists the pairs whose feedback is
// averaged into q_ibr of pair p.
class AggregateWeights {
 public:
  AggregateWeights() = default;
  explicit AggregateWeights(std::vector<std::vector<WeightEntry>> rows);

  // Each pair only averages its own feedback.
  static AggregateWeights direct(std::size_t rows);

  std::size_t size() const noexcept { return rows_.size(); }
  const std::vector<WeightEntry>& row(std::size_t p) const { return rows_.at(p); }

  // Throws NonStochasticWeights when a weight is negative or a row sum is
  // further than `tolerance` from 1.
  void validate(double tolerance = 1e-12) const;

 private:
  std::vector<std::vector<WeightEntry>> rows_;
};

// One introduction: `introducer` introduced `newcomer` to `owner`.
struct Introduction {
  std::size_t owner;
  std::size_t newcomer;
  std::size_t introducer;
};

// Default q_ibr weighting: pair (i, j) takes its own feedback with weight 1/2
// and shares the other 1/2 equally among the pairs (i, k) for every k that j
// introduced to i. Pairs without introductions use their own feedback only.
AggregateWeights introduction_weights(const PairIndex& pairs,
                                      std::span<const Introduction> introductions);

// Weighted average of feedback over the contributing pairs of `row`. Throws
// MissingWeight if a contributing pair has no feedback value.
double aggregate_q_ibr(const AggregateWeights& weights,
                       std::span<const std::optional<double>> feedback, std::size_t row);

struct TrajectoryState {
  std::vector<double> R;  // indexed by pair
  std::int64_t t = 0;

  friend bool operator==(const TrajectoryState&, const TrajectoryState&) = default;
};

// Synchronous timeslot update with precomputed aggregates:
// R'[p] = max{(1 - alpha) R[p] + alpha q_ibr[p], 0}.
TrajectoryState step_aggregate(const TrajectoryState& state, std::span<const double> q_ibr,
                               double alpha);

// Same update with q_ibr derived from raw per-pair feedback through `weights`.
TrajectoryState step(const TrajectoryState& state, const AggregateWeights& weights,
                     std::span<const double> feedback, double alpha);

enum class Behavior {
  Good,       // q_ij = +R_ji
  Bad,        // q_ij = -R_ji
  Malicious,  // q_ij = -1
};

// Feedback each tenant i gives on tenant j under the reciprocal service model.
std::vector<double> behavior_feedback(const PairIndex& pairs, std::span<const Behavior> behavior,
                                      std::span<const double> R);

struct DynamicsConfig {
  double alpha = 0.1;
  std::int64_t t_max = 10'000;
  double epsilon = 1e-9;
  // Keep every k-th state in the returned trajectory (the final state is
  // always kept).
  std::int64_t record_stride = 1;
};

enum class Group { Bad, Good };

struct EquilibriumReport {
  bool converged = false;
  std::int64_t t_final = 0;
  // Pairs failing: |q_ibr - R| < tol, or R < tol with q_ibr < 0, where
  // tol = epsilon / alpha (the residual left when max |dR| < epsilon).
  std::vector<std::pair<std::size_t, std::size_t>> violations;
  // Bad = zero reputation at every other tenant.
  std::vector<Group> classification;
};

struct EquilibriumRun {
  std::vector<TrajectoryState> trajectory;
  EquilibriumReport report;
};

// Iterates `step` with behavior-model feedback until max |dR| < epsilon or
// t_max steps. Non-convergence is reported, not thrown.
EquilibriumRun run_to_equilibrium(TrajectoryState initial, const PairIndex& pairs,
                                  const AggregateWeights& weights,
                                  std::span<const Behavior> behavior,
                                  const DynamicsConfig& config);

// The timeslot update driven by an exogenous aggregate feedback sequence; element t of
// the result is R[t], so the result has q_ibr_series.size() + 1 states.
std::vector<TrajectoryState> evolve(TrajectoryState initial,
                                    std::span<const std::vector<double>> q_ibr_series,
                                    double alpha);

struct ContractionReport {
  std::vector<double> gaps;  // max over pairs |R - R'| per tick
  // First tick with a nonzero gap, if any.
  std::optional<std::size_t> onset;
  // (1 - alpha)^(t - onset) * gaps[onset] from the onset on, 0 before.
  std::vector<double> envelope;
};

// Throws LengthMismatch when trajectories differ in length or dimension.
ContractionReport contraction_gap(std::span<const TrajectoryState> a,
                                  std::span<const TrajectoryState> b, double alpha);

// Dominant eigenvalue estimate of (1 - alpha) I + alpha Sigma1 by power
// iteration. Throws NonStochasticWeights if any row sum of Sigma1 differs
// from 1 by more than 1e-12.
double spectral_radius_check(const AggregateWeights& weights, double alpha);

// CSV with header t,owner,subject,score. `names` maps tenant index to label.
void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryState> trajectory,
                          const PairIndex& pairs, std::span<const std::string> names);

}  // namespace seit::dynamics
