#include "riskplan/harness.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "riskplan/rng.hpp"

namespace riskplan::harness {

namespace {

constexpr std::uint64_t kGoalLabel = 0x676f616cULL;
constexpr std::uint64_t kPathLabel = 0x70617468ULL;
constexpr std::uint64_t kMotionLabel = 0x6d6f7665ULL;
constexpr std::uint64_t kPlanLabel = 0x706c616eULL;
constexpr std::uint64_t kAidedLabel = 0x61696465ULL;
constexpr std::uint64_t kDataLabel = 0x64617461ULL;

std::string sample_goal(const intent::IntentBelief& prior, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {kGoalLabel}));
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  std::string last;
  for (const auto& [goal, p] : prior.probs()) {
    if (p <= 0.0) continue;
    acc += p;
    last = goal;
    if (u < acc) return goal;
  }
  return last;
}

Point2 move_toward(const Point2& from, const Point2& to, double max_dist) {
  const Point2 d = to - from;
  const double len = d.norm();
  if (len <= max_dist) return to;
  return from + d * (max_dist / len);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Dataset build_dataset(const Config& cfg, std::uint64_t seed) {
  return patientgen::generate_dataset(cfg.layout, cfg.dataset_per_pair, cfg.patientgen,
                                      derive_seed(seed, {kDataLabel}));
}

GpMixture train_mixture(const Config& cfg, std::uint64_t seed) {
  return fit_mixture(build_dataset(cfg, seed), cfg.layout.goal_ids(), cfg.gp);
}

ScenarioResult run_scenario(const Context& ctx, const ScenarioSpec& spec, std::uint64_t seed) {
  const Config& cfg = ctx.config;
  const RoomLayout& layout = cfg.layout;
  const double dt = cfg.predict.dt;

  ScenarioResult out;
  out.pose = spec.pose;
  out.method = spec.method;
  const Point2 start = layout.initial_pose(spec.pose);
  out.goal = spec.true_goal ? *spec.true_goal : sample_goal(cfg.intent.prior, seed);
  const Point2 goal = layout.goal(out.goal);

  std::vector<Point2> path = patientgen::generate(start, out.goal, layout, cfg.patientgen,
                                                  derive_seed(seed, {kPathLabel})).states;
  std::size_t path_i = 0;

  auto inputs = planning_inputs(cfg, ctx.mixture);
  inputs.planner.method = spec.method;

  Rng motion_rng(derive_seed(seed, {kMotionLabel}));
  std::normal_distribution<double> normal(0.0, 1.0);

  Point2 patient = start;
  Point2 robot = cfg.scenario.robot_start;
  intent::IntentBelief belief = cfg.intent.prior;
  std::optional<planner::InterventionCandidate> target;  // time_index is absolute
  if (spec.method != planner::Method::none) target = spec.forced_plan;
  std::optional<std::size_t> aided_from;

  out.trajectory.push_back(patient);
  out.robot.push_back(robot);
  out.beliefs.push_back(belief);

  for (std::size_t t = 0;; ++t) {
    // The plan being executed decides the handover; replanning happens afterwards.
    if (!aided_from && target && t >= target->time_index && distance(robot, patient) <= cfg.planner.reach_eps) {
      aided_from = t;
      out.intervention = Intervention{patient, t};
      if (cfg.scenario.aided_support_factor != 1.0) {
        auto aided_cfg = cfg.patientgen;
        aided_cfg.support_weight *= cfg.scenario.aided_support_factor;
        path = patientgen::generate_to(patient, goal, layout, aided_cfg, derive_seed(seed, {kAidedLabel, t})).states;
        path_i = 0;
      }
    }

    if (!aided_from && spec.method != planner::Method::none && !spec.forced_plan) {
      if (t % cfg.scenario.replan_stride == 0) {
        const auto p = planner::plan(belief, patient, robot, inputs, derive_seed(seed, {kPlanLabel, t}));
        ++out.planning_calls;
        if (p && p->feasible) target = planner::InterventionCandidate{p->candidate.pose, t + p->candidate.time_index};
      }
    }

    const bool arrived = path_i + 1 >= path.size();
    if (arrived || t + 1 >= cfg.scenario.max_steps) break;

    if (aided_from) {
      robot = patient;
    } else if (target) {
      robot = move_toward(robot, target->pose, cfg.planner.robot_speed * dt);
    }

    ++path_i;
    const Point2 anchor = path[path_i];
    // Draw noise unconditionally so the random stream is method-independent.
    const Point2 jitter{normal(motion_rng), normal(motion_rng)};
    Point2 next = anchor;
    if (path_i + 1 < path.size()) {
      const Point2 noisy = anchor + jitter * cfg.scenario.motion_noise;
      if (is_free(noisy, layout)) next = noisy;
    }

    const auto upd = intent::update(belief, patient, next, ctx.mixture, cfg.intent);
    out.fell_back_to_prior = out.fell_back_to_prior || upd.fell_back_to_prior;
    belief = upd.belief;
    patient = next;
    if (aided_from) robot = patient;

    out.trajectory.push_back(patient);
    out.robot.push_back(robot);
    out.beliefs.push_back(belief);
  }

  const std::size_t n = out.trajectory.size();
  out.scores.resize(n);
  out.aided.resize(n);
  double sum = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    const bool aided = aided_from && s >= *aided_from;
    out.aided[s] = aided;
    out.scores[s] = aided ? fall::score_aided(out.trajectory[s], layout, cfg.fall)
                          : fall::score_unaided(out.trajectory[s], layout, cfg.fall);
    sum += out.scores[s];
    out.max_score = std::max(out.max_score, out.scores[s]);
  }
  out.mean_score = sum / static_cast<double>(n);
  return out;
}

std::uint64_t scenario_seed(std::uint64_t master, const std::string& pose, std::size_t index) {
  return derive_seed(master, {fnv1a(pose), index});
}

BatchReport run_batch(const Context& ctx, const std::vector<std::string>& poses,
                      const std::vector<planner::Method>& methods, std::size_t n_scenarios, std::uint64_t seed) {
  if (n_scenarios < 1) throw std::invalid_argument("batch needs at least one scenario");
  BatchReport report;
  report.tail = ctx.config.batch.report_tail;
  for (const auto& pose : poses) {
    for (const auto method : methods) {
      std::vector<double> means;
      for (std::size_t i = 0; i < n_scenarios; ++i) {
        ScenarioSpec spec{pose, std::nullopt, method, std::nullopt};
        ScenarioResult r;
        try {
          r = run_scenario(ctx, spec, scenario_seed(seed, pose, i));
        } catch (const std::exception& e) {
          throw std::runtime_error("scenario " + std::to_string(i) + " (pose '" + pose + "', method " +
                                   std::string(to_string(method)) + "): " + e.what());
        }
        means.push_back(r.mean_score);
        report.scenarios.push_back({pose, method, i, r.goal, r.mean_score, r.max_score,
                                    r.intervention ? std::optional<std::size_t>(r.intervention->time) : std::nullopt,
                                    r.trajectory.size()});
      }
      const auto dist = risk::EmpiricalDist::uniform(means);
      report.rows.push_back({pose, method, risk::expected(dist), risk::cvar(dist, report.tail), n_scenarios});
    }
  }
  return report;
}

void write_scenario_csv(const ScenarioResult& r, const std::string& path) {
  auto out = open_out(path);
  const auto goals = r.beliefs.front().goals();
  out << "t,x,y,score,aided";
  for (const auto& g : goals) out << ",belief_" << g;
  out << '\n';
  for (std::size_t t = 0; t < r.trajectory.size(); ++t) {
    out << t << ',' << format_number(r.trajectory[t].x) << ',' << format_number(r.trajectory[t].y) << ','
        << format_number(r.scores[t]) << ',' << (r.aided[t] ? 1 : 0);
    for (const auto& g : goals) out << ',' << format_number(r.beliefs[t][g]);
    out << '\n';
  }
}

void write_batch_csv(const BatchReport& report, const std::string& path) {
  auto out = open_out(path);
  const int pct = static_cast<int>(std::lround(report.tail * 100.0));
  out << "pose,method,mean,cvar" << pct << ",n\n";
  for (const auto& row : report.rows) {
    out << row.pose << ',' << to_string(row.method) << ',' << format_number(row.mean) << ','
        << format_number(row.cvar) << ',' << row.n << '\n';
  }
}

void write_scenarios_csv(const BatchReport& report, const std::string& path) {
  auto out = open_out(path);
  out << "pose,method,scenario,goal,mean_score,max_score,intervention_t,steps\n";
  for (const auto& s : report.scenarios) {
    out << s.pose << ',' << to_string(s.method) << ',' << s.index << ',' << s.goal << ','
        << format_number(s.mean_score) << ',' << format_number(s.max_score) << ','
        << (s.intervention_time ? std::to_string(*s.intervention_time) : std::string()) << ',' << s.steps << '\n';
  }
}

void write_manifest(const std::string& path, const std::string& command, const Config& cfg, std::uint64_t seed,
                    const std::vector<std::string>& outputs) {
  nlohmann::json j;
  j["tool"] = "riskplan";
  j["version"] = "0.1.0";
  j["command"] = command;
  j["config_hash"] = cfg.source_hash;
  j["config_schema_version"] = kConfigSchemaVersion;
  j["seed"] = seed;
  j["outputs"] = outputs;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

}  // namespace riskplan::harness
