#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "seit/protocol.hpp"
#include "seit/query_engine.hpp"

namespace seit {

// Per-tenant proxy configuration file (JSON):
//   {"tenant": "T1",                      (optional)
//    "components": [{name, address, kind, description, tasks}],
//    "edge_selectivity_threshold": 0.3,
//    "query_rate_limit": {"max": 5, "window_ticks": 60}}
struct ProxyConfig {
  std::optional<TenantId> tenant;
  std::vector<protocol::ComponentDescriptor> components;
  double edge_selectivity_threshold = 0.0;
  RateLimit query_rate_limit;

  friend bool operator==(const ProxyConfig&, const ProxyConfig&) = default;
};

// Throws ConfigParseError naming the line (syntax errors) or the field path
// (schema errors). Component names must be unique.
ProxyConfig load_proxy_config(std::string_view text);

// The frames a proxy sends on start-up: one register per component (or a
// bare register when there are none) followed by a configure.
std::vector<protocol::Message> bootstrap_messages(const ProxyConfig& config, const TenantId& tenant);

}  // namespace seit
