#include "cli.hpp"

#include <CLI11.hpp>
#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "seit/error.hpp"
#include "seit/graph_io.hpp"
#include "seit/policy.hpp"
#include "seit/proxy_config.hpp"
#include "seit/server.hpp"
#include "seit/sim/run.hpp"
#include "seit/sim/topology.hpp"

namespace seit::cli {

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

// Failures reading or parsing user input; reported with exit code 1.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

std::shared_ptr<spdlog::logger> make_logger() {
  auto logger = spdlog::get("seit");
  if (!logger) logger = spdlog::stderr_color_mt("seit");
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("SEIT_LOG")) level = spdlog::level::from_str(env);
  logger->set_level(level);
  return logger;
}

sim::ScenarioSpec load_spec(const std::string& path, const std::optional<std::uint64_t>& seed) {
  const std::string text = read_file(path);
  if (!seed) return sim::parse_spec(text);
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::InvalidSpec, "spec must be a JSON object");
  doc["seed"] = *seed;
  return sim::parse_spec(doc.dump());
}

struct Options {
  std::string spec_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool events = false;
  std::string listen = "127.0.0.1:7878";
  std::string graph_path;
  std::string src;
  std::string dst;
  Tick tick = 0;
  std::vector<std::string> proxy_paths;
  std::vector<std::string> policy_paths;
};

int simulate(const Options& o, std::ostream& out, spdlog::logger& log) {
  const sim::ScenarioSpec spec = load_spec(o.spec_path, o.seed);
  log.info("running {} scenario, seed {}", sim::to_string(spec.kind), spec.seed);
  sim::EventLog events;
  const sim::MetricsReport report = sim::run_scenario(spec, o.events ? &events : nullptr);

  const std::filesystem::path dir(o.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "metrics.json", sim::report_to_json(report));
  std::ostringstream csv;
  sim::write_report_csv(csv, report);
  write_file(dir / "metrics.csv", csv.str());
  if (const auto* eq = std::get_if<sim::EquilibriumSummary>(&report.body)) {
    std::ostringstream traj;
    dynamics::write_trajectory_csv(traj, eq->trajectory, dynamics::PairIndex(eq->names.size()), eq->names);
    write_file(dir / "trajectory.csv", traj.str());
  }
  if (o.events) {
    std::ostringstream ev;
    events.write_csv(ev);
    write_file(dir / "events.csv", ev.str());
  }
  out << "wrote " << (dir / "metrics.json").string() << '\n';
  return 0;
}

int serve(const Options& o, std::ostream& out, spdlog::logger& log) {
  Manager manager;
  if (!o.graph_path.empty()) {
    GraphSnapshot snap = snapshot_from_json(read_file(o.graph_path));
    manager.load(std::move(snap.graph), std::move(snap.query_configs));
  }
  ManagerServer server(std::move(manager), parse_listen_address(o.listen));
  server.start();
  out << "listening on port " << server.port() << std::endl;
  log.info("manager listening on {}", o.listen);
  g_stop = false;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.wait(g_stop);
  server.stop();
  return 0;
}

int query(const Options& o, std::ostream& out) {
  GraphSnapshot snap = snapshot_from_json(read_file(o.graph_path));
  QueryEngine engine;
  for (QueryConfig& c : snap.query_configs) engine.configure(std::move(c));
  const auto result = engine.find_introduction_path(snap.graph, TenantId(o.src), TenantId(o.dst), o.tick);
  if (!result) {
    out << "NoPath\n";
    return 1;
  }
  nlohmann::ordered_json doc;
  doc["src"] = o.src;
  doc["dst"] = o.dst;
  doc["path"] = nlohmann::ordered_json::array();
  for (const TenantId& id : result->path) doc["path"].push_back(id.str());
  doc["bottleneck"] = result->bottleneck;
  doc["accepted"] = result->accepted;
  out << doc.dump() << '\n';
  return 0;
}

int validate_config(const Options& o, std::ostream& out) {
  if (o.proxy_paths.empty() && o.policy_paths.empty()) {
    throw CLI::ValidationError("validate-config", "give at least one --proxy or --policy file");
  }
  for (const std::string& path : o.proxy_paths) {
    load_proxy_config(read_file(path));
    out << path << ": ok\n";
  }
  for (const std::string& path : o.policy_paths) {
    const PolicyProfile profile = parse_profile(read_file(path), MonotonicityCheck::Warn);
    for (const std::string& w : profile.warnings()) out << path << ": warning: " << w << '\n';
    out << path << ": ok\n";
  }
  return 0;
}

int dump(const Options& o, std::ostream& out) {
  if (o.graph_path.empty() == o.spec_path.empty()) {
    throw CLI::ValidationError("dump", "give exactly one of --graph or --spec");
  }
  if (!o.graph_path.empty()) {
    const GraphSnapshot snap = snapshot_from_json(read_file(o.graph_path));
    out << snapshot_to_json(snap.graph, snap.query_configs) << '\n';
    return 0;
  }
  const sim::ScenarioSpec spec = load_spec(o.spec_path, o.seed);
  sim::Rng rng(spec.seed);
  const sim::Topology topo = sim::build_topology(spec, rng);
  const GraphParams params{spec.introduction_scale, spec.chain_attenuation, spec.default_score};
  out << snapshot_to_json(sim::bootstrap_graph(topo, params)) << '\n';
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reputation-based isolation for multi-tenant clouds", args.empty() ? "seit" : args[0]};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sim::library_version()));
  Options o;

  auto* simulate_cmd = app.add_subcommand("simulate", "Run a scenario and write metrics.{json,csv}");
  simulate_cmd->add_option("--spec", o.spec_path, "Scenario JSON file")->required();
  simulate_cmd->add_option("--seed", o.seed, "Override the scenario's seed");
  simulate_cmd->add_option("--out", o.out_dir, "Output directory")->required();
  simulate_cmd->add_flag("--events", o.events, "Also write events.csv");

  auto* serve_cmd = app.add_subcommand("serve", "Run the reputation manager over TCP");
  serve_cmd->add_option("--listen", o.listen, "host:port")->capture_default_str();
  serve_cmd->add_option("--graph", o.graph_path, "Initial graph snapshot");

  auto* query_cmd = app.add_subcommand("query", "Find an introduction path in a graph snapshot");
  query_cmd->add_option("--graph", o.graph_path, "Graph snapshot JSON")->required();
  query_cmd->add_option("--src", o.src, "Requesting tenant")->required();
  query_cmd->add_option("--dst", o.dst, "Destination tenant")->required();
  query_cmd->add_option("--tick", o.tick, "Query time for rate limits");

  auto* validate_cmd = app.add_subcommand("validate-config", "Check proxy and policy files");
  validate_cmd->add_option("--proxy", o.proxy_paths, "Proxy configuration JSON");
  validate_cmd->add_option("--policy", o.policy_paths, "Policy profile JSON");

  auto* dump_cmd = app.add_subcommand("dump", "Print a graph snapshot");
  dump_cmd->add_option("--graph", o.graph_path, "Snapshot to canonicalize");
  dump_cmd->add_option("--spec", o.spec_path, "Scenario whose bootstrap graph to print");
  dump_cmd->add_option("--seed", o.seed, "Override the scenario's seed");

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << sim::library_version() << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return 2;
  }

  auto log = make_logger();
  try {
    if (*simulate_cmd) return simulate(o, out, *log);
    if (*serve_cmd) return serve(o, out, *log);
    if (*query_cmd) return query(o, out);
    if (*validate_cmd) return validate_config(o, out);
    if (*dump_cmd) return dump(o, out);
  } catch (const CLI::ValidationError& e) {
    err << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return 1;
  } catch (const InputError& e) {
    err << e.what() << '\n';
    return 1;
  } catch (const std::system_error& e) {
    err << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace seit::cli
