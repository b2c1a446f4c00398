#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "riskplan/config.hpp"

namespace riskplan::harness {

/// What a single simulated episode runs.
struct ScenarioSpec {
  std::string pose;
  /// Unset: drawn from the intent prior with the scenario seed.
  std::optional<std::string> true_goal;
  planner::Method method = planner::Method::expected_cvar;
  /// Replaces planning with a fixed intervention (absolute time index).
  std::optional<planner::InterventionCandidate> forced_plan;
};

struct Intervention {
  Point2 pose;
  std::size_t time = 0;
};

struct ScenarioResult {
  std::string pose;
  std::string goal;
  planner::Method method = planner::Method::none;
  std::vector<Point2> trajectory;
  std::vector<Point2> robot;
  std::vector<double> scores;
  std::vector<bool> aided;
  std::vector<intent::IntentBelief> beliefs;
  std::optional<Intervention> intervention;
  double mean_score = 0.0;
  double max_score = 0.0;
  std::size_t planning_calls = 0;
  bool fell_back_to_prior = false;
};

/// Trained model plus the config it belongs to.
struct Context {
  Config config;
  GpMixture mixture;
};

/// Generates the training set from the config and fits the mixture.
GpMixture train_mixture(const Config& cfg, std::uint64_t seed);
Dataset build_dataset(const Config& cfg, std::uint64_t seed);

/// Receding-horizon episode: observe, update intent, replan, move the robot,
/// hand over the walker once it is within reach at or after the planned time.
ScenarioResult run_scenario(const Context& ctx, const ScenarioSpec& spec, std::uint64_t seed);

struct ScenarioSummary {
  std::string pose;
  planner::Method method;
  std::size_t index = 0;
  std::string goal;
  double mean_score = 0.0;
  double max_score = 0.0;
  std::optional<std::size_t> intervention_time;
  std::size_t steps = 0;
};

struct BatchRow {
  std::string pose;
  planner::Method method;
  double mean = 0.0;
  double cvar = 0.0;
  std::size_t n = 0;
};

struct BatchReport {
  std::vector<BatchRow> rows;
  std::vector<ScenarioSummary> scenarios;
  double tail = 0.1;
};

/// Seed of scenario `index` for `pose`; shared by all methods.
std::uint64_t scenario_seed(std::uint64_t master, const std::string& pose, std::size_t index);

/// n_scenarios per (pose, method) with common random numbers across methods;
/// rows are ordered by (pose, method) in the given order.
BatchReport run_batch(const Context& ctx, const std::vector<std::string>& poses,
                      const std::vector<planner::Method>& methods, std::size_t n_scenarios, std::uint64_t seed);

void write_scenario_csv(const ScenarioResult& r, const std::string& path);
void write_batch_csv(const BatchReport& report, const std::string& path);
void write_scenarios_csv(const BatchReport& report, const std::string& path);
void write_manifest(const std::string& path, const std::string& command, const Config& cfg, std::uint64_t seed,
                    const std::vector<std::string>& outputs);

/// Shortest round-trip decimal text of v.
std::string format_number(double v);

}  // namespace riskplan::harness
