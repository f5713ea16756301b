#include <algorithm>
#include <cmath>
#include <optional>
#include <queue>
#include <unordered_map>

#include "seit/error.hpp"
#include "seit/manager.hpp"
#include "seit/policy.hpp"
#include "seit/sim/run.hpp"
#include "seit/sim/topology.hpp"

namespace seit::sim {

namespace {

enum class Sensing { Host, Middlebox };

struct Variant {
  std::string name;
  bool seit = false;
  bool parallel = false;
  Sensing sensing = Sensing::Host;
  bool autoscale = true;
};

struct AttackPlan {
  std::size_t attacker;
  Tick start;
  std::vector<std::size_t> targets;
};

// Everything drawn once per seed and shared by all variants.
struct World {
  Topology topology;
  std::vector<AttackPlan> attacks;
  std::vector<Tick> flow_start;  // one per bootstrap connection, in order
};

World make_world(const ScenarioSpec& spec) {
  Rng rng(spec.seed);
  World w{build_topology(spec, rng), {}, {}};
  const std::size_t n = w.topology.size();
  std::uniform_int_distribution<Tick> start(0, spec.start_spread_ms - 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < w.topology.connections[i].size(); ++k) {
      w.flow_start.push_back(start(rng));
    }
  }
  const auto targets = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(spec.attacker_target_fraction * static_cast<double>(n - 1))));
  for (std::size_t a : w.topology.attacker_indices()) {
    AttackPlan plan{a, start(rng), {}};
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < n; ++i) {
      if (i != a) pool.push_back(i);
    }
    for (std::size_t i = 0; i < targets; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(targets);
    plan.targets = std::move(pool);
    w.attacks.push_back(std::move(plan));
  }
  return w;
}

Rng traffic_rng(std::uint64_t seed) {
  std::seed_seq seq{seed, std::uint64_t{0x5e17}};
  return Rng(seq);
}

ShimSpec flow_controller(const TenantId& owner, const PolicyProfile& profile) {
  ShimSpec spec;
  spec.kind = ComponentKind::FlowController;
  spec.owner = owner;
  spec.profile = profile;
  return spec;
}

ShimSpec ids_sensor(const TenantId& owner, const ScenarioSpec& spec) {
  ShimSpec ids;
  ids.kind = ComponentKind::IDSSensor;
  ids.owner = owner;
  ids.outbound_weights = {{"bad-packet", spec.bad_feedback}, {"good-exchange", spec.good_feedback}};
  return ids;
}

struct Flow {
  std::size_t src;
  std::size_t dst;
  int remaining;
  Tick interval;
  bool attack;
};

struct Event {
  Tick time;
  std::uint64_t seq;
  bool connect;       // attack connection attempt, else packet
  std::size_t a, b;   // connect: plan index, target index; packet: flow index

  bool operator>(const Event& o) const { return std::tie(time, seq) > std::tie(o.time, o.seq); }
};

struct Outcome {
  PacketCounts attack;
  PacketCounts normal;
  std::int64_t approved = 0;
  std::int64_t rejected = 0;
  std::int64_t unprocessed = 0;
  std::vector<std::int64_t> interval_load;
};

class TrafficRun {
 public:
  TrafficRun(const ScenarioSpec& spec, const World& world, Variant variant, EventLog* log)
      : spec_(spec),
        world_(world),
        variant_(std::move(variant)),
        log_(log),
        rng_(traffic_rng(spec.seed)),
        profile_(variant_.sensing == Sensing::Host
                     ? PolicyProfile("flow-controller",
                                     {{0.0, spec.block_threshold, Action::Block},
                                      {spec.block_threshold, 1.0, Action::Allow}})
                     : flow_controller_profile(spec.block_threshold, spec.bypass_threshold)),
        manager_(ManagerConfig{
            GraphParams{spec.introduction_scale, spec.chain_attenuation, spec.default_score},
            QueryConfig{TenantId{}, spec.selectivity_threshold,
                        RateLimit{spec.rate_limit_max, spec.rate_limit_window_ms}},
            spec.feedback_step}),
        rules_(world.topology.size()),
        detections_(world.topology.size()) {
    const Topology& topo = world_.topology;
    if (variant_.seit) {
      manager_.load(bootstrap_graph(topo, manager_.graph().params()), {});
      std::vector<double> bounds{spec.block_threshold};
      if (variant_.sensing == Sensing::Middlebox) bounds.push_back(spec.bypass_threshold);
      // Crossings are reported for new <= t < old (falling) and old < t <= new
      // (rising), while bands are [lo, hi). Watching both nextafter(b, 0) and
      // b catches every move across a band edge b in either direction.
      std::vector<double> thresholds;
      for (double b : bounds) {
        thresholds.push_back(std::nextafter(b, 0.0));
        thresholds.push_back(b);
      }
      for (const TenantId& id : topo.ids) {
        shims_.emplace_back(flow_controller(id, profile_));
        sensors_.emplace_back(ids_sensor(id, spec));
        expect_silent(manager_.handle(
            id, protocol::Configure{id, std::nullopt, std::nullopt,
                                    protocol::SubscriptionSetting{std::nullopt, thresholds},
                                    std::nullopt},
            0));
      }
    }
  }

  Outcome run() {
    const Topology& topo = world_.topology;
    std::size_t next_start = 0;
    for (std::size_t i = 0; i < topo.size(); ++i) {
      if (topo.attacker[i]) {
        next_start += topo.connections[i].size();
        continue;
      }
      for (std::size_t j : topo.connections[i]) {
        const Tick start = world_.flow_start[next_start++];
        if (variant_.seit) set_rule(j, i, *manager_.graph().reputation_of(topo.ids[j], topo.ids[i]), start);
        open_flow(Flow{i, j, spec_.normal_packets, spec_.normal_interval_ms, false}, start);
      }
    }
    const Tick per_target = spec_.attacker_packets * spec_.attacker_interval_ms;
    for (std::size_t p = 0; p < world_.attacks.size(); ++p) {
      const AttackPlan& plan = world_.attacks[p];
      for (std::size_t k = 0; k < plan.targets.size(); ++k) {
        const Tick at = variant_.parallel ? plan.start : plan.start + static_cast<Tick>(k) * per_target;
        push(Event{at, 0, true, p, k});
      }
    }
    while (!queue_.empty()) {
      const Event e = queue_.top();
      queue_.pop();
      if (e.connect) {
        connect(e.time, world_.attacks[e.a].attacker, world_.attacks[e.a].targets[e.b]);
      } else {
        packet(e.time, e.a);
      }
    }
    return std::move(out_);
  }

 private:
  static void expect_silent(const std::vector<Delivery>& d) {
    for (const Delivery& x : d) {
      if (const auto* err = std::get_if<protocol::ErrorMsg>(&x.message)) {
        throw Error(ErrorCode::InvalidSpec, "manager rejected setup: " + err->message);
      }
    }
  }

  void push(Event e) {
    e.seq = seq_++;
    queue_.push(e);
  }

  void open_flow(Flow f, Tick start) {
    flows_.push_back(f);
    push(Event{start, 0, false, flows_.size() - 1, 0});
  }

  void trace(Tick t, const char* event, std::size_t src, std::size_t dst, std::string detail = {}) {
    if (log_ != nullptr) {
      log_->record(t, variant_.name, event, world_.topology.ids[src], world_.topology.ids[dst],
                   std::move(detail));
    }
  }

  void set_rule(std::size_t owner, std::size_t subject, double score, Tick t) {
    const ComponentCommand cmd = shims_[owner].inbound(
        ReputationUpdate{world_.topology.ids[owner], world_.topology.ids[subject], score, t});
    rules_[owner][subject] = std::get<FlowRule>(cmd).route;
  }

  Route route(std::size_t src, std::size_t dst) const {
    if (!variant_.seit) return variant_.sensing == Sensing::Middlebox ? Route::ViaMiddlebox : Route::Direct;
    const auto& row = rules_[dst];
    auto it = row.find(src);
    return it == row.end() ? Route::Block : it->second;
  }

  void connect(Tick t, std::size_t attacker, std::size_t target) {
    const Topology& topo = world_.topology;
    const int packets = spec_.attacker_packets;
    if (!variant_.seit) {
      auto& seen = detections_[target];
      auto it = seen.find(attacker);
      if (it != seen.end() && it->second >= spec_.baseline_block_after) {
        out_.rejected++;
        out_.attack.generated += packets;
        out_.attack.blocked_at_source += packets;
        trace(t, "refused", attacker, target);
        return;
      }
      out_.approved++;
      trace(t, "connect", attacker, target);
      open_flow(Flow{attacker, target, packets, spec_.attacker_interval_ms, true}, t);
      return;
    }
    const auto replies =
        manager_.handle(topo.ids[attacker], protocol::ConnectRequest{topo.ids[attacker], topo.ids[target], std::nullopt}, t);
    for (const Delivery& d : replies) {
      if (const auto* ok = std::get_if<protocol::ConnectApprove>(&d.message)) {
        if (d.to != topo.ids[target]) continue;
        out_.approved++;
        trace(t, "approve", attacker, target, std::to_string(ok->path.size()));
        set_rule(target, attacker, ok->score, t);
        open_flow(Flow{attacker, target, packets, spec_.attacker_interval_ms, true}, t);
        return;
      }
    }
    out_.rejected++;
    out_.attack.generated += packets;
    out_.attack.blocked_at_source += packets;
    trace(t, "reject", attacker, target);
  }

  void feedback(Tick t, std::size_t reporter, std::size_t subject, const char* tag) {
    const Topology& topo = world_.topology;
    const auto event = sensors_[reporter].outbound(ComponentEvent{tag, topo.ids[subject], t});
    if (!event) return;
    const auto deliveries = manager_.handle(
        topo.ids[reporter],
        protocol::Feedback{event->reporter, event->subject, event->q, event->cause, std::nullopt}, t);
    for (const Delivery& d : deliveries) {
      if (const auto* u = std::get_if<protocol::ReputationUpdateMsg>(&d.message)) {
        const std::size_t owner = manager_.graph().index_of(u->subscriber);
        const std::size_t subj = manager_.graph().index_of(u->subject);
        set_rule(owner, subj, u->score, t);
        trace(t, "update", owner, subj, std::string(u->direction));
      } else if (const auto* err = std::get_if<protocol::ErrorMsg>(&d.message)) {
        throw Error(ErrorCode::InvalidSpec, "feedback rejected: " + err->message);
      }
    }
  }

  // A bad packet was detected by the sensor acting for `dst`.
  void detected(Tick t, const Flow& f) {
    if (variant_.seit) {
      feedback(t, f.dst, f.src, "bad-packet");
    } else {
      detections_[f.dst][f.src]++;
    }
  }

  void packet(Tick t, std::size_t index) {
    Flow& f = flows_[index];
    PacketCounts& c = f.attack ? out_.attack : out_.normal;
    c.generated++;
    if (--f.remaining > 0) push(Event{t + f.interval, 0, false, index, 0});

    const double p_bad = f.attack ? 1.0 : bad_packet_probability(world_.topology.quality[f.src], spec_.careless_scale);
    const bool bad = p_bad >= 1.0 || (p_bad > 0.0 && std::bernoulli_distribution(p_bad)(rng_));

    switch (route(f.src, f.dst)) {
      case Route::Block:
        c.dropped_by_policy++;
        return;
      case Route::ViaMiddlebox: {
        const auto k = static_cast<std::size_t>(t / spec_.middlebox_interval_ms);
        if (out_.interval_load.size() <= k) {
          out_.interval_load.resize(k + 1, 0);
          processed_.resize(k + 1, 0);
        }
        out_.interval_load[k]++;
        trace(t, "mb_arrival", f.src, f.dst, std::to_string(k));
        const std::int64_t capacity =
            static_cast<std::int64_t>(spec_.middlebox_capacity_pps) * spec_.middlebox_budget *
            spec_.middlebox_interval_ms / 1000;
        if (!variant_.autoscale && processed_[k] >= capacity) {
          out_.unprocessed++;
          c.reached++;
          return;
        }
        processed_[k]++;
        if (sensor_sample(bad, spec_.detect_prob, rng_)) {
          c.filtered_by_middlebox++;
          detected(t, f);
          return;
        }
        c.reached++;
        if (!bad && variant_.seit) feedback(t, f.dst, f.src, "good-exchange");
        return;
      }
      case Route::ViaProxy:
      case Route::Direct:
        c.reached++;
        if (variant_.sensing != Sensing::Host) return;
        if (bad) {
          if (sensor_sample(true, spec_.detect_prob, rng_)) detected(t, f);
        } else if (variant_.seit) {
          feedback(t, f.dst, f.src, "good-exchange");
        }
        return;
    }
  }

  const ScenarioSpec& spec_;
  const World& world_;
  Variant variant_;
  EventLog* log_;
  Rng rng_;
  PolicyProfile profile_;
  Manager manager_;
  std::vector<Shim> shims_;    // flow controllers
  std::vector<Shim> sensors_;  // IDS outbound feedback
  std::vector<std::unordered_map<std::size_t, Route>> rules_;  // at dst, by src
  std::vector<std::unordered_map<std::size_t, int>> detections_;  // baseline, at dst
  std::vector<Flow> flows_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::uint64_t seq_ = 0;
  std::vector<std::int64_t> processed_;
  Outcome out_;
};

}  // namespace

DosReport run_dos(const ScenarioSpec& spec, EventLog* log) {
  validate(spec);
  const World world = make_world(spec);
  DosReport report;
  for (const Variant& v : {Variant{"baseline", false, false, Sensing::Host, true},
                           Variant{"seit_sequential", true, false, Sensing::Host, true},
                           Variant{"seit_parallel", true, true, Sensing::Host, true}}) {
    Outcome o = TrafficRun(spec, world, v, log).run();
    report.variants.push_back(DosVariant{v.name, o.attack, o.normal, o.approved, o.rejected});
  }
  return report;
}

MiddleboxReport run_middlebox(const ScenarioSpec& spec, EventLog* log) {
  validate(spec);
  const World world = make_world(spec);
  MiddleboxReport report{spec.middlebox_interval_ms, spec.middlebox_capacity_pps, spec.middlebox_budget, {}};
  const std::int64_t per_instance = static_cast<std::int64_t>(spec.middlebox_capacity_pps) *
                                    spec.middlebox_interval_ms / 1000;
  for (bool seit : {false, true}) {
    for (bool autoscale : {true, false}) {
      const std::string name = std::string(seit ? "seit" : "no_seit") + (autoscale ? "_autoscale" : "_fixed");
      Outcome o = TrafficRun(spec, world, Variant{name, seit, false, Sensing::Middlebox, autoscale}, log).run();
      MiddleboxVariant v{name, seit, autoscale, o.attack, o.normal, o.unprocessed, std::move(o.interval_load), {}, 0};
      for (std::int64_t load : v.interval_load) {
        const std::int64_t k = autoscale ? (load + per_instance - 1) / per_instance : spec.middlebox_budget;
        v.instances.push_back(k);
        v.instance_intervals += k;
      }
      report.variants.push_back(std::move(v));
    }
  }
  return report;
}

}  // namespace seit::sim
