#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "seit/dynamics.hpp"
#include "seit/sim/scenario.hpp"
#include "seit/tenant.hpp"

namespace seit::sim {

// Every generated packet ends up in exactly one of the four outcomes.
struct PacketCounts {
  std::int64_t generated = 0;
  std::int64_t reached = 0;
  std::int64_t blocked_at_source = 0;
  std::int64_t dropped_by_policy = 0;
  std::int64_t filtered_by_middlebox = 0;

  bool conserved() const noexcept {
    return reached + blocked_at_source + dropped_by_policy + filtered_by_middlebox == generated;
  }
  double blocked_fraction() const noexcept {
    return generated == 0 ? 0.0 : 1.0 - static_cast<double>(reached) / static_cast<double>(generated);
  }
  friend bool operator==(const PacketCounts&, const PacketCounts&) = default;
};

struct DosVariant {
  std::string name;  // baseline, seit_sequential, seit_parallel
  PacketCounts attack;
  PacketCounts normal;
  std::int64_t connections_approved = 0;
  std::int64_t connections_rejected = 0;
};

struct DosReport {
  std::vector<DosVariant> variants;
};

struct MiddleboxVariant {
  std::string name;  // {no_seit, seit}_{autoscale, fixed}
  bool seit = false;
  bool autoscale = false;
  PacketCounts attack;
  PacketCounts normal;
  std::int64_t unprocessed = 0;  // passed a saturated middlebox unfiltered
  std::vector<std::int64_t> interval_load;
  std::vector<std::int64_t> instances;
  std::int64_t instance_intervals = 0;
};

struct MiddleboxReport {
  std::int64_t interval_ms = 0;
  int capacity_pps = 0;
  int budget = 0;
  std::vector<MiddleboxVariant> variants;
};

struct BrokerClass {
  double quality = 0.0;
  std::int64_t providers = 0;
  std::int64_t selections = 0;
};

struct BrokerReport {
  std::vector<BrokerClass> classes;  // ascending quality
  std::int64_t searches = 0;
  std::int64_t introductions = 0;
  std::int64_t requests = 0;
  std::int64_t responses = 0;
};

struct EquilibriumSummary {
  std::vector<std::int64_t> t;
  std::vector<double> good_at_good;  // mean R(i, j), i and j good
  std::vector<double> bad_at_good;   // mean R(i, j), i good, j malicious
  bool converged = false;
  std::int64_t t_final = 0;
  std::size_t violations = 0;
  std::size_t classified_bad = 0;
  // Kept for the trajectory CSV only.
  std::vector<dynamics::TrajectoryState> trajectory;
  std::vector<std::string> names;
};

using ReportBody = std::variant<DosReport, MiddleboxReport, BrokerReport, EquilibriumSummary>;

struct MetricsReport {
  ScenarioSpec spec;
  std::string version;
  ReportBody body;
};

std::string report_to_json(const MetricsReport& report);
void write_report_csv(std::ostream& out, const MetricsReport& report);

// Optional per-event trace. Row order is simulation order. With a sink the
// rows are written as CSV immediately (header first) instead of being kept.
class EventLog {
 public:
  EventLog() = default;
  explicit EventLog(std::ostream& sink);

  struct Row {
    Tick tick;
    std::string variant;
    std::string event;
    std::string src;
    std::string dst;
    std::string detail;
  };

  void record(Tick tick, const std::string& variant, const char* event, const TenantId& src,
              const TenantId& dst, std::string detail = {});
  const std::vector<Row>& rows() const noexcept { return rows_; }
  void write_csv(std::ostream& out) const;

 private:
  std::vector<Row> rows_;
  std::ostream* sink_ = nullptr;
};

}  // namespace seit::sim
