#pragma once

#include "commfield/experiments.hpp"
#include "commfield/output.hpp"

#include <json.hpp>

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

namespace commfield {

enum class ScenarioKind { cloak, bender, pullback, convergence, custom };
std::string to_string(ScenarioKind kind);
/// Throws ConfigError for an unknown name.
ScenarioKind scenario_kind(const std::string& name);

/// Parsed run configuration. Only the member matching `kind` is meaningful.
struct RunConfig {
  ScenarioKind kind{ScenarioKind::cloak};
  CloakScenario cloak;
  std::vector<double> epsilon_sweep;   // cloak: extra cloaked runs, empty to skip
  Index consistency_samples{1000};     // cloak: random shell points for the closed-form check
  BenderScenario bender;
  PullbackScenario pullback;
  ConvergenceScenario convergence;
  CustomScenario custom;
  OutputToggles outputs;
  /// Every key with its resolved value, defaults included.
  nlohmann::json echo;
};

/// Strict-schema JSON. Unknown keys, wrong types and out-of-range values throw
/// ConfigError or ValidationError naming the key; syntax errors report line and column.
/// With `expected`, a "scenario" key that disagrees is an error and a missing one is
/// filled in.
RunConfig parse_config(const std::string& text, std::optional<ScenarioKind> expected = std::nullopt);

nlohmann::json config_to_json(const RunConfig& config);

/// Report plus the fields worth writing out. Field meshes live in `meshes`.
struct ScenarioOutput {
  ExperimentReport report;
  std::deque<Mesh> meshes;
  std::vector<NamedField> fields;
};

/// Runs the configured scenario. The seed only drives the random sampling of the cloak
/// closed-form consistency metric and is recorded in the provenance.
ScenarioOutput run_scenario(const RunConfig& config, std::uint64_t seed = 0);

}  // namespace commfield
