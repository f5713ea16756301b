#include "seit/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "seit/error.hpp"

namespace seit::dynamics {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "alpha must lie in (0, 1)");
  }
}

double relax(double r, double q_ibr, double alpha) {
  return std::max((1.0 - alpha) * r + alpha * q_ibr, 0.0);
}

std::vector<double> aggregate_all(const AggregateWeights& weights,
                                  std::span<const double> feedback) {
  std::vector<double> q(weights.size());
  for (std::size_t p = 0; p < weights.size(); ++p) {
    double sum = 0.0;
    for (const WeightEntry& e : weights.row(p)) sum += e.weight * feedback[e.source];
    q[p] = sum;
  }
  return q;
}

}  // namespace

PairIndex::PairIndex(std::size_t tenants) : n_(tenants) {
  if (tenants < 2) throw Error(ErrorCode::InvalidParameter, "need at least two tenants");
}

std::size_t PairIndex::index(std::size_t owner, std::size_t subject) const {
  if (owner >= n_ || subject >= n_ || owner == subject) {
    throw Error(ErrorCode::InvalidParameter, "pair out of range");
  }
  return owner * (n_ - 1) + (subject < owner ? subject : subject - 1);
}

std::pair<std::size_t, std::size_t> PairIndex::pair(std::size_t index) const {
  const std::size_t owner = index / (n_ - 1);
  std::size_t subject = index % (n_ - 1);
  if (subject >= owner) ++subject;
  return {owner, subject};
}

AggregateWeights::AggregateWeights(std::vector<std::vector<WeightEntry>> rows)
    : rows_(std::move(rows)) {
  for (const auto& row : rows_) {
    for (const WeightEntry& e : row) {
      if (e.source >= rows_.size()) {
        throw Error(ErrorCode::InvalidParameter, "weight references a pair out of range");
      }
    }
  }
}

AggregateWeights AggregateWeights::direct(std::size_t rows) {
  std::vector<std::vector<WeightEntry>> out(rows);
  for (std::size_t p = 0; p < rows; ++p) out[p].push_back({p, 1.0});
  return AggregateWeights(std::move(out));
}

void AggregateWeights::validate(double tolerance) const {
  for (std::size_t p = 0; p < rows_.size(); ++p) {
    double sum = 0.0;
    for (const WeightEntry& e : rows_[p]) {
      if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
        throw Error(ErrorCode::NonStochasticWeights, "negative weight in row " + std::to_string(p));
      }
      sum += e.weight;
    }
    if (std::abs(sum - 1.0) > tolerance) {
      throw Error(ErrorCode::NonStochasticWeights,
                  "row " + std::to_string(p) + " sums to " + std::to_string(sum));
    }
  }
}

AggregateWeights introduction_weights(const PairIndex& pairs,
                                      std::span<const Introduction> introductions) {
  // introduced[(owner, introducer)] = newcomers
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> introduced;
  for (const Introduction& in : introductions) {
    introduced[{in.owner, in.introducer}].push_back(in.newcomer);
  }
  std::vector<std::vector<WeightEntry>> rows(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs.pair(p);
    auto it = introduced.find({i, j});
    if (it == introduced.end() || it->second.empty()) {
      rows[p].push_back({p, 1.0});
      continue;
    }
    rows[p].push_back({p, 0.5});
    const double share = 0.5 / static_cast<double>(it->second.size());
    for (std::size_t k : it->second) rows[p].push_back({pairs.index(i, k), share});
  }
  return AggregateWeights(std::move(rows));
}

double aggregate_q_ibr(const AggregateWeights& weights,
                       std::span<const std::optional<double>> feedback, std::size_t row) {
  double sum = 0.0;
  for (const WeightEntry& e : weights.row(row)) {
    if (e.source >= feedback.size() || !feedback[e.source]) {
      throw Error(ErrorCode::MissingWeight,
                  "no feedback for contributing pair " + std::to_string(e.source));
    }
    sum += e.weight * *feedback[e.source];
  }
  return sum;
}

TrajectoryState step_aggregate(const TrajectoryState& state, std::span<const double> q_ibr,
                               double alpha) {
  check_alpha(alpha);
  if (q_ibr.size() != state.R.size()) {
    throw Error(ErrorCode::LengthMismatch, "aggregate feedback size differs from state size");
  }
  TrajectoryState next{std::vector<double>(state.R.size()), state.t + 1};
  for (std::size_t p = 0; p < state.R.size(); ++p) next.R[p] = relax(state.R[p], q_ibr[p], alpha);
  return next;
}

TrajectoryState step(const TrajectoryState& state, const AggregateWeights& weights,
                     std::span<const double> feedback, double alpha) {
  if (weights.size() != state.R.size() || feedback.size() != state.R.size()) {
    throw Error(ErrorCode::LengthMismatch, "weights/feedback size differs from state size");
  }
  const std::vector<double> q = aggregate_all(weights, feedback);
  return step_aggregate(state, q, alpha);
}

std::vector<double> behavior_feedback(const PairIndex& pairs, std::span<const Behavior> behavior,
                                      std::span<const double> R) {
  if (behavior.size() != pairs.tenants() || R.size() != pairs.size()) {
    throw Error(ErrorCode::LengthMismatch, "behavior model does not match the pair index");
  }
  std::vector<double> q(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs.pair(p);
    switch (behavior[j]) {
      case Behavior::Good: q[p] = R[pairs.index(j, i)]; break;
      case Behavior::Bad: q[p] = -R[pairs.index(j, i)]; break;
      case Behavior::Malicious: q[p] = -1.0; break;
    }
  }
  return q;
}

EquilibriumRun run_to_equilibrium(TrajectoryState initial, const PairIndex& pairs,
                                  const AggregateWeights& weights,
                                  std::span<const Behavior> behavior,
                                  const DynamicsConfig& config) {
  check_alpha(config.alpha);
  if (config.epsilon <= 0.0 || config.t_max < 0 || config.record_stride < 1) {
    throw Error(ErrorCode::InvalidParameter, "invalid dynamics configuration");
  }
  if (initial.R.size() != pairs.size() || weights.size() != pairs.size()) {
    throw Error(ErrorCode::LengthMismatch, "initial state does not match the pair index");
  }
  for (double r : initial.R) {
    if (!(r >= 0.0 && r <= 1.0)) throw Error(ErrorCode::InvalidParameter, "R outside [0, 1]");
  }
  weights.validate();

  EquilibriumRun run;
  run.trajectory.push_back(initial);
  TrajectoryState state = std::move(initial);
  bool converged = false;
  while (state.t < config.t_max) {
    const std::vector<double> q = behavior_feedback(pairs, behavior, state.R);
    TrajectoryState next = step(state, weights, q, config.alpha);
    double delta = 0.0;
    for (std::size_t p = 0; p < next.R.size(); ++p) {
      delta = std::max(delta, std::abs(next.R[p] - state.R[p]));
    }
    state = std::move(next);
    converged = delta < config.epsilon;
    if (converged || state.t % config.record_stride == 0) run.trajectory.push_back(state);
    if (converged) break;
  }
  if (run.trajectory.back().t != state.t) run.trajectory.push_back(state);

  EquilibriumReport& report = run.report;
  report.t_final = state.t;
  const double tol = config.epsilon / config.alpha;
  const std::vector<double> q_ibr =
      aggregate_all(weights, behavior_feedback(pairs, behavior, state.R));
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const bool fixed = std::abs(q_ibr[p] - state.R[p]) < tol;
    const bool clamped = state.R[p] < tol && q_ibr[p] < 0.0;
    if (!fixed && !clamped) report.violations.push_back(pairs.pair(p));
  }
  report.converged = converged && report.violations.empty();

  const std::size_t n = pairs.tenants();
  report.classification.assign(n, Group::Bad);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs.pair(p);
    if (state.R[p] >= tol) report.classification[j] = Group::Good;
  }
  return run;
}

std::vector<TrajectoryState> evolve(TrajectoryState initial,
                                    std::span<const std::vector<double>> q_ibr_series,
                                    double alpha) {
  std::vector<TrajectoryState> out;
  out.reserve(q_ibr_series.size() + 1);
  out.push_back(std::move(initial));
  for (const auto& q : q_ibr_series) out.push_back(step_aggregate(out.back(), q, alpha));
  return out;
}

ContractionReport contraction_gap(std::span<const TrajectoryState> a,
                                  std::span<const TrajectoryState> b, double alpha) {
  check_alpha(alpha);
  if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "trajectory lengths differ");
  ContractionReport report;
  report.gaps.reserve(a.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a[t].R.size() != b[t].R.size()) {
      throw Error(ErrorCode::LengthMismatch, "state dimensions differ at tick " + std::to_string(t));
    }
    double gap = 0.0;
    for (std::size_t p = 0; p < a[t].R.size(); ++p) {
      gap = std::max(gap, std::abs(a[t].R[p] - b[t].R[p]));
    }
    report.gaps.push_back(gap);
    if (!report.onset && gap > 0.0) report.onset = t;
  }
  report.envelope.assign(a.size(), 0.0);
  if (report.onset) {
    const std::size_t t0 = *report.onset;
    for (std::size_t t = t0; t < a.size(); ++t) {
      report.envelope[t] =
          std::pow(1.0 - alpha, static_cast<double>(t - t0)) * report.gaps[t0];
    }
  }
  return report;
}

double spectral_radius_check(const AggregateWeights& weights, double alpha) {
  check_alpha(alpha);
  weights.validate(1e-12);
  const std::size_t m = weights.size();
  if (m == 0) return 0.0;

  std::vector<double> v(m);
  for (std::size_t i = 0; i < m; ++i) v[i] = 1.0 + 1e-6 * static_cast<double>(i + 1) / m;
  std::vector<double> w(m);
  double estimate = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    double vnorm = 0.0;
    for (double x : v) vnorm = std::max(vnorm, std::abs(x));
    double wnorm = 0.0;
    for (std::size_t p = 0; p < m; ++p) {
      double mixed = 0.0;
      for (const WeightEntry& e : weights.row(p)) mixed += e.weight * v[e.source];
      w[p] = (1.0 - alpha) * v[p] + alpha * mixed;
      wnorm = std::max(wnorm, std::abs(w[p]));
    }
    const double next = wnorm / vnorm;
    for (std::size_t p = 0; p < m; ++p) v[p] = w[p] / wnorm;
    const bool settled = iter > 0 && std::abs(next - estimate) < 1e-12 * std::abs(next);
    estimate = next;
    if (settled) break;
  }
  return estimate;
}

void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryState> trajectory,
                          const PairIndex& pairs, std::span<const std::string> names) {
  if (names.size() != pairs.tenants()) {
    throw Error(ErrorCode::LengthMismatch, "one name per tenant required");
  }
  out << "t,owner,subject,score\n";
  const auto precision = out.precision(17);
  for (const TrajectoryState& s : trajectory) {
    for (std::size_t p = 0; p < s.R.size(); ++p) {
      const auto [i, j] = pairs.pair(p);
      out << s.t << ',' << names[i] << ',' << names[j] << ',' << s.R[p] << '\n';
    }
  }
  out.precision(precision);
}

}  // namespace seit::dynamics
