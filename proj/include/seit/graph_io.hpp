#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "seit/query_engine.hpp"
#include "seit/reputation_graph.hpp"

namespace seit {

struct GraphSnapshot {
  ReputationGraph graph;
  std::vector<QueryConfig> query_configs;
};

// {"params": {scale, attenuation, default_global_score},
//  "tenants": [...],
//  "edges": [{owner, subject, score, chain, created_at, last_update}],
//  "query_configs": [{owner, selectivity_threshold, max_introductions, window}]}
// "params" and "query_configs" are optional on input.
std::string snapshot_to_json(const ReputationGraph& graph,
                             const std::vector<QueryConfig>& query_configs = {});

// Throws ConfigParseError on malformed input and the graph's own errors on
// inconsistent content.
GraphSnapshot snapshot_from_json(std::string_view text);

}  // namespace seit
