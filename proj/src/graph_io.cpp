#include "seit/graph_io.hpp"

#include <json.hpp>

#include "seit/error.hpp"

namespace seit {

using nlohmann::ordered_json;

std::string snapshot_to_json(const ReputationGraph& graph,
                             const std::vector<QueryConfig>& query_configs) {
  ordered_json doc;
  const GraphParams& p = graph.params();
  doc["params"] = {{"scale", p.scale},
                   {"attenuation", p.attenuation},
                   {"default_global_score", p.default_global_score}};
  doc["tenants"] = ordered_json::array();
  for (const TenantId& id : graph.tenants()) doc["tenants"].push_back(id.str());
  doc["edges"] = ordered_json::array();
  for (const Edge& e : graph.edges()) {
    ordered_json chain = ordered_json::array();
    for (const TenantId& id : e.intro.chain) chain.push_back(id.str());
    doc["edges"].push_back({{"owner", e.owner.str()},
                            {"subject", e.subject.str()},
                            {"score", e.score},
                            {"chain", chain},
                            {"created_at", e.intro.created_at},
                            {"last_update", e.last_update}});
  }
  doc["query_configs"] = ordered_json::array();
  for (const QueryConfig& c : query_configs) {
    doc["query_configs"].push_back({{"owner", c.owner.str()},
                                    {"selectivity_threshold", c.selectivity_threshold},
                                    {"max_introductions", c.rate_limit.max_introductions},
                                    {"window", c.rate_limit.window}});
  }
  return doc.dump(2);
}

GraphSnapshot snapshot_from_json(std::string_view text) {
  try {
    const auto doc = ordered_json::parse(text);
    GraphParams params;
    if (auto it = doc.find("params"); it != doc.end()) {
      params.scale = it->value("scale", params.scale);
      params.attenuation = it->value("attenuation", params.attenuation);
      params.default_global_score = it->value("default_global_score", params.default_global_score);
    }
    GraphSnapshot snap{ReputationGraph(params), {}};
    for (const auto& id : doc.at("tenants")) snap.graph.register_tenant(TenantId(id.get<std::string>()));
    for (const auto& e : doc.at("edges")) {
      std::vector<TenantId> chain;
      for (const auto& c : e.value("chain", ordered_json::array())) {
        chain.emplace_back(c.get<std::string>());
      }
      snap.graph.restore_edge(Edge{TenantId(e.at("owner").get<std::string>()),
                                   TenantId(e.at("subject").get<std::string>()),
                                   e.at("score").get<double>(),
                                   IntroductionRecord{std::move(chain), e.value("created_at", Tick{0})},
                                   e.value("last_update", Tick{0})});
    }
    if (auto it = doc.find("query_configs"); it != doc.end()) {
      for (const auto& c : *it) {
        QueryConfig q;
        q.owner = TenantId(c.at("owner").get<std::string>());
        q.selectivity_threshold = c.value("selectivity_threshold", 0.0);
        q.rate_limit.max_introductions = c.value("max_introductions", q.rate_limit.max_introductions);
        q.rate_limit.window = c.value("window", q.rate_limit.window);
        validate(q);
        snap.query_configs.push_back(std::move(q));
      }
    }
    return snap;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigParseError, e.what());
  }
}

}  // namespace seit
