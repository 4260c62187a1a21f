#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cits/attack.hpp"
#include "cits/engine.hpp"
#include "cits/monitor.hpp"
#include "cits/services.hpp"
#include "cits/signal.hpp"

namespace cits {

/// A world effect as actually applied, for gate-soundness checks.
struct AppliedEffect {
  Millis time = 0;
  std::size_t step = 0;
  EffectKind kind = EffectKind::DbTamper;
  std::string detail;
  std::size_t trace_index = 0;
};

struct SimulationResult {
  SimConfig config;
  std::optional<Scenario> scenario;
  RunSummary summary;
  std::vector<TraceRecord> trace;
  AttackOutcome outcome;
  std::vector<Alarm> alarms;
  std::map<std::string, std::vector<PhaseRecord>> phase_history;
  std::vector<AppliedEffect> effects;
  std::vector<ServedRoute> served_routes;
  CentralDb stored;
  CentralDb ground_truth;
};

/// Runs services, signal controllers and monitors on `topology` up to the
/// horizon, with `scenario`'s steps interleaved by time when given. The
/// catalog must be given together with the scenario. Throws UnknownCve,
/// UnknownNode, ScenarioError and configuration errors.
SimulationResult run_simulation(const Topology& topology, const SimConfig& config,
                                const VulnCatalog* catalog = nullptr, const Scenario* scenario = nullptr);

struct ScenarioBundle {
  Scenario scenario;
  VulnCatalog catalog;
};

/// Loads a scenario file and its catalog, resolving the catalog path
/// relative to the scenario file unless `catalog_override` is given.
ScenarioBundle load_scenario_bundle(const std::filesystem::path& scenario_path,
                                    const std::optional<std::filesystem::path>& catalog_override = std::nullopt);

}  // namespace cits
