#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "riskplan/fallmodel.hpp"
#include "riskplan/intent.hpp"
#include "riskplan/mixture.hpp"
#include "riskplan/patientgen.hpp"
#include "riskplan/planner.hpp"
#include "riskplan/predict.hpp"
#include "riskplan/room.hpp"

namespace riskplan {

inline constexpr int kConfigSchemaVersion = 1;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
  std::size_t max_steps = 120;
  /// Replan every `replan_stride` observations.
  std::size_t replan_stride = 1;
  /// Std of the per-step deviation of the simulated patient from its path, meters.
  double motion_noise = 0.02;
  /// Multiplier on the support weight once the patient walks with the aid.
  /// At 1 the patient keeps its remaining path and only the scoring changes.
  double aided_support_factor = 1.0;
  Point2 robot_start;
};

struct BatchConfig {
  std::size_t n_scenarios = 20;
  std::vector<std::string> poses;
  std::vector<planner::Method> methods;
  double report_tail = 0.1;
};

/// Everything read from one configuration file.
struct Config {
  RoomLayout layout;
  fall::FallParams fall;
  intent::IntentConfig intent;
  MixtureFitConfig gp;
  patientgen::PatientGenConfig patientgen;
  std::size_t dataset_per_pair = 5;
  PredictConfig predict;
  planner::PlannerConfig planner;
  planner::CemConfig cem;
  ScenarioConfig scenario;
  BatchConfig batch;
  /// FNV-1a of the source text, hex.
  std::string source_hash;
};

/// Parses and validates a config document; `source` names it in error messages.
Config parse_config(const std::string& text, const std::string& source);
Config load_config(const std::string& path);

/// The repository's default room fixture.
std::string default_config_path();

/// Planner inputs view over a config and a trained mixture.
planner::PlanningInputs planning_inputs(const Config& cfg, const GpMixture& mixture);

}  // namespace riskplan
