#include "cits/cli.hpp"

#include <chrono>
#include <fstream>
#include <thread>

#include "CLI11.hpp"
#include "cits/attack_paths.hpp"
#include "cits/errors.hpp"
#include "cits/report.hpp"
#include "cits/simulation.hpp"

namespace cits {

namespace {

struct RunArgs {
  std::string topology;
  std::string scenario;
  std::string catalog;
  std::uint64_t seed = 42;
  int seed_count = 1;
  int jobs = 1;
  Millis horizon_ms = 60000;
  Millis tick_ms = 100;
  std::string trace;
  std::string report;
  bool summary = false;
  bool timing = false;
};

struct PathArgs {
  std::string topology;
  std::string catalog;
  std::string attacker;
  std::string goal = "signal-control";
  int depth = 4;
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << text;
  if (!f) throw IoError("cannot write '" + path + "'");
}

// "out.json" with seed 7 -> "out.seed7.json".
std::string with_seed(const std::string& path, std::uint64_t seed) {
  std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + ".seed" + std::to_string(seed) + p.extension().string())).string();
}

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  Topology t;
  try {
    t = parse_topology_file(path);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUnreadable;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUnreadable;
  }
  const auto violations = validate_topology(t);
  for (const auto& v : violations) out << v << "\n";
  if (violations.empty()) {
    out << "ok: " << t.nodes.size() << " nodes, " << t.links.size() << " links\n";
    return kExitOk;
  }
  return kExitError;
}

int cmd_run(const RunArgs& a, std::ostream& out) {
  const auto started = std::chrono::steady_clock::now();
  const Topology topology = load_topology(a.topology);
  std::optional<ScenarioBundle> bundle;
  if (!a.scenario.empty()) {
    std::optional<std::filesystem::path> catalog;
    if (!a.catalog.empty()) catalog = a.catalog;
    bundle = load_scenario_bundle(a.scenario, catalog);
  }
  if (a.seed_count < 1) throw Error("--seed-count must be >= 1");

  std::vector<SimulationResult> results(static_cast<std::size_t>(a.seed_count));
  std::vector<std::exception_ptr> failures(results.size());
  const auto one = [&](std::size_t i) {
    try {
      SimConfig cfg;
      cfg.seed = a.seed + i;
      cfg.horizon_ms = a.horizon_ms;
      cfg.tick_ms = a.tick_ms;
      results[i] = run_simulation(topology, cfg, bundle ? &bundle->catalog : nullptr,
                                  bundle ? &bundle->scenario : nullptr);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  };
  // Engines share only the immutable topology and catalog.
  const std::size_t jobs = static_cast<std::size_t>(std::max(1, a.jobs));
  for (std::size_t base = 0; base < results.size(); base += jobs) {
    std::vector<std::thread> pool;
    for (std::size_t i = base; i < std::min(results.size(), base + jobs); ++i) pool.emplace_back(one, i);
    for (auto& th : pool) th.join();
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  bool alarms = false;
  for (const auto& r : results) {
    alarms = alarms || !r.alarms.empty();
    const bool many = results.size() > 1;
    if (!a.trace.empty()) write_file(many ? with_seed(a.trace, r.config.seed) : a.trace, to_jsonl(r.trace));
    if (!a.report.empty()) write_file(many ? with_seed(a.report, r.config.seed) : a.report, report_json(r));
    if (a.summary) out << report_text(r);
  }
  if (a.timing) {
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
    out << "wall-clock: " << ms.count() << " ms\n";
  }
  return alarms ? kExitAlarms : kExitOk;
}

int cmd_attack_paths(const PathArgs& a, std::ostream& out) {
  const Topology topology = load_topology(a.topology);
  const VulnCatalog catalog = load_vuln_catalog(a.catalog);
  const auto goal = AttackGoal::parse(a.goal);
  for (const auto& p : enumerate_attack_paths(topology, catalog, a.attacker, goal, a.depth)) {
    out << p.chain() << "\n";
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deterministic C-ITS discrete-event simulator", "cits-sim"};
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a topology file");
  validate->add_option("--topology", validate_path, "Topology JSON")->required();

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Run services, optionally with an attack scenario");
  run->add_option("--topology", ra.topology, "Topology JSON")->required();
  run->add_option("--scenario", ra.scenario, "Attack scenario JSON");
  run->add_option("--catalog", ra.catalog, "Vulnerability catalog (default: the scenario's own)");
  run->add_option("--seed", ra.seed, "Generator seed")->capture_default_str();
  run->add_option("--seed-count", ra.seed_count, "Run seeds seed..seed+N-1")->capture_default_str();
  run->add_option("--jobs", ra.jobs, "Parallel runs when --seed-count > 1")->capture_default_str();
  run->add_option("--horizon-ms", ra.horizon_ms, "Simulated time")->capture_default_str();
  run->add_option("--tick-ms", ra.tick_ms, "Controller and monitor cadence")->capture_default_str();
  run->add_option("--trace", ra.trace, "Write the JSONL trace here");
  run->add_option("--report", ra.report, "Write the JSON report here");
  run->add_flag("--summary", ra.summary, "Print a human-readable summary");
  run->add_flag("--timing", ra.timing, "Print wall-clock time (human output only)");

  PathArgs pa;
  auto* paths = app.add_subcommand("attack-paths", "List minimal CVE chains reaching a goal");
  paths->add_option("--topology", pa.topology, "Topology JSON")->required();
  paths->add_option("--catalog", pa.catalog, "Vulnerability catalog")->required();
  paths->add_option("--attacker", pa.attacker, "Attacker node id")->required();
  paths->add_option("--goal", pa.goal, "Capability or effect, e.g. signal-control, db-write:CENTRAL")
      ->capture_default_str();
  paths->add_option("--depth", pa.depth, "Maximum chain length")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }

  try {
    if (validate->parsed()) return cmd_validate(validate_path, out, err);
    if (run->parsed()) return cmd_run(ra, out);
    return cmd_attack_paths(pa, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace cits
