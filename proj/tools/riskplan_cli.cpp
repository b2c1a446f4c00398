// riskplan command line: dataset generation, GP training, single planning
// calls, single scenarios and the batch evaluation protocol.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "riskplan/harness.hpp"

namespace fs = std::filesystem;
using namespace riskplan;

namespace {

struct Common {
  std::string config = default_config_path();
  std::uint64_t seed = 1;
  std::string method;
  std::string out = "out";
  std::string model;
};

void add_common(CLI::App* app, Common& c, bool with_method) {
  app->add_option("--config", c.config, "Configuration file")->capture_default_str();
  app->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  app->add_option("--out", c.out, "Output directory")->capture_default_str();
  if (with_method) app->add_option("--method", c.method, "none|deterministic|expected|cvar|expected_cvar");
}

GpMixture load_or_train(const Config& cfg, const Common& c) {
  if (!c.model.empty()) return load_mixture(c.model);
  std::cerr << "training GP mixture (seed " << c.seed << ")...\n";
  return harness::train_mixture(cfg, c.seed);
}

std::string out_file(const Common& c, const std::string& name) {
  fs::create_directories(c.out);
  return (fs::path(c.out) / name).string();
}

nlohmann::json plan_json(const planner::InterventionPlan& p) {
  nlohmann::json j;
  j["feasible"] = p.feasible;
  j["pose"] = {p.candidate.pose.x, p.candidate.pose.y};
  j["time_index"] = p.candidate.time_index;
  j["log_objective"] = p.log_objective;
  j["patient_log_optimality"] = p.patient_log_optimality;
  j["robot_log_optimality"] = p.robot_log_optimality;
  j["goal_log_optimality"] = p.goal_log_optimality;
  j["iterations"] = p.iterations;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-aware walker delivery planning"};
  app.require_subcommand(1);
  Common c;

  auto* gen = app.add_subcommand("gen-data", "Generate the synthetic patient motion dataset");
  add_common(gen, c, false);

  auto* train = app.add_subcommand("train", "Fit the GP mixture and write the model file");
  add_common(train, c, false);
  std::string data_file;
  train->add_option("--data", data_file, "Dataset CSV (default: generate from config)");

  auto* plan = app.add_subcommand("plan", "Run one planning call from an initial pose");
  add_common(plan, c, true);
  std::string pose;
  plan->add_option("--model", c.model, "Trained mixture file");
  plan->add_option("--pose", pose, "Initial pose name")->required();

  auto* run = app.add_subcommand("run", "Simulate one scenario");
  add_common(run, c, true);
  std::string goal;
  run->add_option("--model", c.model, "Trained mixture file");
  run->add_option("--pose", pose, "Initial pose name")->required();
  run->add_option("--goal", goal, "True goal (default: sampled from the prior)");

  auto* batch = app.add_subcommand("batch", "Run the batch evaluation over poses and methods");
  add_common(batch, c, true);
  std::size_t n_scenarios = 0;
  batch->add_option("--model", c.model, "Trained mixture file");
  batch->add_option("--n", n_scenarios, "Scenarios per pose and method (default: from config)");

  CLI11_PARSE(app, argc, argv);

  try {
    Config cfg = load_config(c.config);
    if (!c.method.empty()) cfg.planner.method = planner::parse_method(c.method);

    if (gen->parsed()) {
      const auto data = harness::build_dataset(cfg, c.seed);
      const auto path = out_file(c, "dataset.csv");
      write_dataset_csv(data, path);
      harness::write_manifest(out_file(c, "manifest.json"), "gen-data", cfg, c.seed, {path});
      std::cout << data.size() << " samples -> " << path << '\n';
    } else if (train->parsed()) {
      const auto data = data_file.empty() ? harness::build_dataset(cfg, c.seed) : read_dataset_csv(data_file);
      const auto mixture = fit_mixture(data, cfg.layout.goal_ids(), cfg.gp);
      const auto path = out_file(c, "mixture.json");
      save_mixture(mixture, path);
      harness::write_manifest(out_file(c, "manifest.json"), "train", cfg, c.seed, {path});
      for (const auto& [g, m] : mixture.unaided()) {
        std::cout << g << "  x: " << m.x.hyperparams().describe() << "\n" << std::string(g.size(), ' ')
                  << "  y: " << m.y.hyperparams().describe() << '\n';
      }
      std::cout << "model -> " << path << '\n';
    } else if (plan->parsed()) {
      const auto mixture = load_or_train(cfg, c);
      const auto inputs = planning_inputs(cfg, mixture);
      const auto p = planner::plan(cfg.intent.prior, cfg.layout.initial_pose(pose), cfg.scenario.robot_start, inputs,
                                   c.seed);
      nlohmann::json j = p ? plan_json(*p) : nlohmann::json{{"method", "none"}};
      j["method"] = std::string(to_string(cfg.planner.method));
      std::cout << j.dump(2) << '\n';
    } else if (run->parsed()) {
      const harness::Context ctx{cfg, load_or_train(cfg, c)};
      harness::ScenarioSpec spec{pose, goal.empty() ? std::nullopt : std::optional<std::string>(goal),
                                 cfg.planner.method, std::nullopt};
      const auto r = harness::run_scenario(ctx, spec, c.seed);
      const auto path = out_file(c, "scenario.csv");
      harness::write_scenario_csv(r, path);
      harness::write_manifest(out_file(c, "manifest.json"), "run", cfg, c.seed, {path});
      std::cout << "goal " << r.goal << ", " << r.trajectory.size() << " steps, mean score "
                << harness::format_number(r.mean_score) << ", max " << harness::format_number(r.max_score);
      if (r.intervention) std::cout << ", walker delivered at t=" << r.intervention->time;
      std::cout << "\n-> " << path << '\n';
    } else if (batch->parsed()) {
      const harness::Context ctx{cfg, load_or_train(cfg, c)};
      auto methods = cfg.batch.methods;
      if (!c.method.empty()) methods = {cfg.planner.method};
      const std::size_t n = n_scenarios ? n_scenarios : cfg.batch.n_scenarios;
      const auto report = harness::run_batch(ctx, cfg.batch.poses, methods, n, c.seed);
      const auto summary = out_file(c, "batch_summary.csv");
      const auto scenarios = out_file(c, "scenarios.csv");
      harness::write_batch_csv(report, summary);
      harness::write_scenarios_csv(report, scenarios);
      harness::write_manifest(out_file(c, "manifest.json"), "batch", cfg, c.seed, {summary, scenarios});
      std::cout << "pose,method,mean,cvar10,n\n";
      for (const auto& row : report.rows) {
        std::cout << row.pose << ',' << to_string(row.method) << ',' << harness::format_number(row.mean) << ','
                  << harness::format_number(row.cvar) << ',' << row.n << '\n';
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
