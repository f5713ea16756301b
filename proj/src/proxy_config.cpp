#include "seit/proxy_config.hpp"

#include <json.hpp>
#include <set>

#include "seit/error.hpp"

namespace seit {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& why) {
  throw Error(ErrorCode::ConfigParseError, where + ": " + why);
}

const json& field(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + key, "missing");
  return *it;
}

void only(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) fail(path + key, "unknown field");
  }
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "must be a string");
  return v.get<std::string>();
}

std::int64_t integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "must be an integer");
  return v.get<std::int64_t>();
}

}  // namespace

ProxyConfig load_proxy_config(std::string_view source) {
  json doc;
  try {
    doc = json::parse(source);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line number.
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < source.size(); ++i) line += source[i] == '\n';
    fail("line " + std::to_string(line), e.what());
  }
  if (!doc.is_object()) fail("line 1", "config must be a JSON object");
  only(doc, "", {"tenant", "components", "edge_selectivity_threshold", "query_rate_limit"});

  ProxyConfig config;
  if (auto it = doc.find("tenant"); it != doc.end()) {
    std::string id = text(*it, "tenant");
    if (id.empty()) fail("tenant", "must not be empty");
    config.tenant = TenantId(std::move(id));
  }

  const json& comps = field(doc, "", "components");
  if (!comps.is_array()) fail("components", "must be an array");
  std::set<std::string> names;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const std::string path = "components[" + std::to_string(i) + "].";
    const json& c = comps[i];
    if (!c.is_object()) fail(path.substr(0, path.size() - 1), "must be an object");
    only(c, path, {"name", "address", "kind", "description", "tasks"});
    protocol::ComponentDescriptor d;
    d.name = text(field(c, path, "name"), path + "name");
    if (d.name.empty()) fail(path + "name", "must not be empty");
    if (!names.insert(d.name).second) fail(path + "name", "duplicate component name '" + d.name + "'");
    d.address = text(field(c, path, "address"), path + "address");
    const std::string kind = text(field(c, path, "kind"), path + "kind");
    if (kind == "service") d.kind = protocol::ComponentRole::Service;
    else if (kind == "executor") d.kind = protocol::ComponentRole::Executor;
    else if (kind == "sensor") d.kind = protocol::ComponentRole::Sensor;
    else fail(path + "kind", "must be service, executor or sensor");
    d.description = text(field(c, path, "description"), path + "description");
    const json& tasks = field(c, path, "tasks");
    if (!tasks.is_array()) fail(path + "tasks", "must be an array");
    for (std::size_t k = 0; k < tasks.size(); ++k) {
      d.tasks.push_back(text(tasks[k], path + "tasks[" + std::to_string(k) + "]"));
    }
    config.components.push_back(std::move(d));
  }

  const json& sel = field(doc, "", "edge_selectivity_threshold");
  if (!sel.is_number()) fail("edge_selectivity_threshold", "must be a number");
  config.edge_selectivity_threshold = sel.get<double>();
  if (!(config.edge_selectivity_threshold >= 0.0 && config.edge_selectivity_threshold <= 1.0)) {
    fail("edge_selectivity_threshold", "must lie in [0, 1]");
  }

  const json& rl = field(doc, "", "query_rate_limit");
  if (!rl.is_object()) fail("query_rate_limit", "must be an object");
  only(rl, "query_rate_limit.", {"max", "window_ticks"});
  config.query_rate_limit.max_introductions =
      integer(field(rl, "query_rate_limit.", "max"), "query_rate_limit.max");
  config.query_rate_limit.window =
      integer(field(rl, "query_rate_limit.", "window_ticks"), "query_rate_limit.window_ticks");
  if (config.query_rate_limit.max_introductions < 0) fail("query_rate_limit.max", "must be >= 0");
  if (config.query_rate_limit.window < 1) fail("query_rate_limit.window_ticks", "must be >= 1");
  return config;
}

std::vector<protocol::Message> bootstrap_messages(const ProxyConfig& config, const TenantId& tenant) {
  std::vector<protocol::Message> out;
  if (config.components.empty()) out.push_back(protocol::Register{tenant, std::nullopt, std::nullopt});
  for (const auto& c : config.components) out.push_back(protocol::Register{tenant, c, std::nullopt});
  out.push_back(protocol::Configure{
      tenant, config.edge_selectivity_threshold,
      protocol::RateLimitSetting{config.query_rate_limit.max_introductions,
                                 config.query_rate_limit.window},
      std::nullopt, std::nullopt});
  return out;
}

}  // namespace seit
