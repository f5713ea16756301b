#include "seit/sim/metrics.hpp"

#include <json.hpp>
#include <ostream>
#include <sstream>

namespace seit::sim {

namespace {

using nlohmann::ordered_json;

ordered_json counts_json(const PacketCounts& c) {
  return ordered_json{{"generated", c.generated},
                      {"reached", c.reached},
                      {"blocked_at_source", c.blocked_at_source},
                      {"dropped_by_policy", c.dropped_by_policy},
                      {"filtered_by_middlebox", c.filtered_by_middlebox},
                      {"blocked_fraction", c.blocked_fraction()}};
}

struct JsonBody {
  ordered_json operator()(const DosReport& r) const {
    ordered_json variants = ordered_json::array();
    for (const DosVariant& v : r.variants) {
      variants.push_back({{"name", v.name},
                          {"attack", counts_json(v.attack)},
                          {"normal", counts_json(v.normal)},
                          {"connections_approved", v.connections_approved},
                          {"connections_rejected", v.connections_rejected}});
    }
    return {{"variants", variants}};
  }
  ordered_json operator()(const MiddleboxReport& r) const {
    ordered_json variants = ordered_json::array();
    for (const MiddleboxVariant& v : r.variants) {
      variants.push_back({{"name", v.name},
                          {"seit", v.seit},
                          {"autoscale", v.autoscale},
                          {"attack", counts_json(v.attack)},
                          {"normal", counts_json(v.normal)},
                          {"unprocessed", v.unprocessed},
                          {"instance_intervals", v.instance_intervals},
                          {"interval_load", v.interval_load},
                          {"instances", v.instances}});
    }
    return {{"interval_ms", r.interval_ms},
            {"capacity_pps", r.capacity_pps},
            {"budget", r.budget},
            {"variants", variants}};
  }
  ordered_json operator()(const BrokerReport& r) const {
    ordered_json classes = ordered_json::array();
    for (const BrokerClass& c : r.classes) {
      classes.push_back({{"quality", c.quality}, {"providers", c.providers}, {"selections", c.selections}});
    }
    return {{"classes", classes},
            {"searches", r.searches},
            {"introductions", r.introductions},
            {"requests", r.requests},
            {"responses", r.responses}};
  }
  ordered_json operator()(const EquilibriumSummary& r) const {
    return {{"converged", r.converged},
            {"t_final", r.t_final},
            {"violations", r.violations},
            {"classified_bad", r.classified_bad},
            {"t", r.t},
            {"good_at_good", r.good_at_good},
            {"bad_at_good", r.bad_at_good}};
  }
};

void counts_row(std::ostream& out, const std::string& variant, const char* population, const PacketCounts& c) {
  out << variant << ',' << population << ',' << c.generated << ',' << c.reached << ',' << c.blocked_at_source
      << ',' << c.dropped_by_policy << ',' << c.filtered_by_middlebox << ',' << c.blocked_fraction() << '\n';
}

constexpr const char* kCountsHeader =
    "variant,population,generated,reached,blocked_at_source,dropped_by_policy,filtered_by_middlebox,blocked_fraction";

struct CsvBody {
  std::ostream& out;

  void operator()(const DosReport& r) const {
    out << kCountsHeader << '\n';
    for (const DosVariant& v : r.variants) {
      counts_row(out, v.name, "attack", v.attack);
      counts_row(out, v.name, "normal", v.normal);
    }
  }
  void operator()(const MiddleboxReport& r) const {
    out << kCountsHeader << ",unprocessed,instance_intervals\n";
    for (const MiddleboxVariant& v : r.variants) {
      for (const auto& [population, c] : {std::pair{"attack", &v.attack}, std::pair{"normal", &v.normal}}) {
        std::ostringstream row;
        row.precision(out.precision());
        counts_row(row, v.name, population, *c);
        std::string line = row.str();
        line.pop_back();
        out << line << ',' << v.unprocessed << ',' << v.instance_intervals << '\n';
      }
    }
  }
  void operator()(const BrokerReport& r) const {
    out << "quality,providers,selections\n";
    for (const BrokerClass& c : r.classes) out << c.quality << ',' << c.providers << ',' << c.selections << '\n';
  }
  void operator()(const EquilibriumSummary& r) const {
    out << "t,good_at_good,bad_at_good\n";
    for (std::size_t k = 0; k < r.t.size(); ++k) {
      out << r.t[k] << ',' << r.good_at_good[k] << ',' << r.bad_at_good[k] << '\n';
    }
  }
};

}  // namespace

std::string report_to_json(const MetricsReport& report) {
  ordered_json doc;
  doc["kind"] = to_string(report.spec.kind);
  doc["seed"] = report.spec.seed;
  doc["version"] = report.version;
  doc["spec"] = ordered_json::parse(spec_to_json(report.spec));
  doc["assumptions"] = {{"normal_packets_scope", "per_connection"},
                        {"attacker_count", "floor(n * attacker_fraction), at least 1"}};
  doc["results"] = std::visit(JsonBody{}, report.body);
  return doc.dump(2) + "\n";
}

void write_report_csv(std::ostream& out, const MetricsReport& report) {
  const auto precision = out.precision(17);
  std::visit(CsvBody{out}, report.body);
  out.precision(precision);
}

namespace {

constexpr const char* kEventHeader = "tick,variant,event,src,dst,detail\n";

void event_row(std::ostream& out, Tick tick, const std::string& variant, const std::string& event,
               const std::string& src, const std::string& dst, const std::string& detail) {
  out << tick << ',' << variant << ',' << event << ',' << src << ',' << dst << ',' << detail << '\n';
}

}  // namespace

EventLog::EventLog(std::ostream& sink) : sink_(&sink) { sink << kEventHeader; }

void EventLog::record(Tick tick, const std::string& variant, const char* event, const TenantId& src,
                      const TenantId& dst, std::string detail) {
  if (sink_ != nullptr) {
    event_row(*sink_, tick, variant, event, src.str(), dst.str(), detail);
    return;
  }
  rows_.push_back(Row{tick, variant, event, src.str(), dst.str(), std::move(detail)});
}

void EventLog::write_csv(std::ostream& out) const {
  out << kEventHeader;
  for (const Row& r : rows_) event_row(out, r.tick, r.variant, r.event, r.src, r.dst, r.detail);
}

}  // namespace seit::sim
