#include "riskplan/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "riskplan/rng.hpp"

#ifndef RISKPLAN_DATA_DIR
#define RISKPLAN_DATA_DIR "data"
#endif

namespace riskplan {

namespace {

using nlohmann::json;

/// Field reader that reports "<source>: <path>: <problem>".
class Reader {
 public:
  Reader(const json& node, std::string source, std::string path)
      : node_(node), source_(std::move(source)), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& field, const std::string& msg) const {
    throw ConfigError(source_ + ": " + join(field) + ": " + msg);
  }

  bool has(const std::string& field) const { return node_.is_object() && node_.contains(field); }

  Reader child(const std::string& field) const {
    if (!has(field)) return Reader(empty_, source_, join(field));
    if (!node_.at(field).is_object()) fail(field, "expected an object");
    return Reader(node_.at(field), source_, join(field));
  }

  const json& raw(const std::string& field) const {
    if (!has(field)) fail(field, "missing");
    return node_.at(field);
  }

  double number(const std::string& field, double fallback) const {
    if (!has(field)) return fallback;
    const auto& v = node_.at(field);
    if (!v.is_number()) fail(field, "expected a number");
    return v.get<double>();
  }

  std::size_t count(const std::string& field, std::size_t fallback) const {
    if (!has(field)) return fallback;
    const auto& v = node_.at(field);
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(field, "expected a nonnegative integer");
    return v.get<std::size_t>();
  }

  std::string text(const std::string& field, const std::string& fallback) const {
    if (!has(field)) return fallback;
    const auto& v = node_.at(field);
    if (!v.is_string()) fail(field, "expected a string");
    return v.get<std::string>();
  }

  Point2 point(const json& v, const std::string& field) const {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      fail(field, "expected [x, y]");
    }
    return {v[0].get<double>(), v[1].get<double>()};
  }

  Rect rect(const json& v, const std::string& field) const {
    if (!v.is_array() || v.size() != 4) fail(field, "expected [xmin, ymin, xmax, ymax]");
    for (const auto& c : v) {
      if (!c.is_number()) fail(field, "expected [xmin, ymin, xmax, ymax]");
    }
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>()};
  }

  std::string join(const std::string& field) const { return path_.empty() ? field : path_ + "." + field; }
  const std::string& source() const { return source_; }

 private:
  static inline const json empty_ = json::object();
  const json& node_;
  std::string source_;
  std::string path_;
};

RoomLayout parse_room(const Reader& r, Point2* robot_start) {
  const auto& bounds = r.raw("bounds");
  const Rect b = r.rect(bounds, "bounds");

  std::vector<Rect> obstacles;
  if (r.has("obstacles")) {
    const auto& arr = r.raw("obstacles");
    if (!arr.is_array()) r.fail("obstacles", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string f = "obstacles[" + std::to_string(i) + "]";
      obstacles.push_back(r.rect(arr[i].is_object() ? arr[i].value("rect", json()) : arr[i], f));
    }
  }
  auto named = [&](const std::string& field, const char* key) {
    std::vector<NamedPoint> out;
    if (!r.has(field)) return out;
    const auto& arr = r.raw(field);
    if (!arr.is_array()) r.fail(field, "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string f = field + "[" + std::to_string(i) + "]";
      if (!arr[i].is_object() || !arr[i].contains(key) || !arr[i][key].is_string() || !arr[i].contains("at")) {
        r.fail(f, std::string("expected {\"") + key + "\": ..., \"at\": [x, y]}");
      }
      out.push_back({arr[i][key].get<std::string>(), r.point(arr[i]["at"], f + ".at")});
    }
    return out;
  };
  std::vector<Point2> supports;
  for (const auto& s : named("supports", "name")) supports.push_back(s.position);
  auto goals = named("goals", "id");
  auto poses = named("initial_poses", "name");
  if (r.has("robot_start")) *robot_start = r.point(r.raw("robot_start"), "robot_start");
  try {
    return RoomLayout(b, std::move(obstacles), std::move(supports), std::move(goals), std::move(poses));
  } catch (const LayoutError& e) {
    r.fail("", e.what());
  }
}

template <typename F>
void checked(const Reader& r, const std::string& section, F&& validate) {
  try {
    validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(r.source() + ": " + section + ": " + e.what());
  }
}

}  // namespace

Config parse_config(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(source + ": " + e.what());
  }
  const Reader root(doc, source, "");
  if (!doc.is_object()) throw ConfigError(source + ": top level must be an object");
  if (root.count("schema_version", 0) != static_cast<std::size_t>(kConfigSchemaVersion)) {
    root.fail("schema_version", "expected " + std::to_string(kConfigSchemaVersion));
  }

  Point2 robot_start;
  if (!root.has("room")) root.fail("room", "missing");
  RoomLayout layout = parse_room(root.child("room"), &robot_start);
  Config cfg{std::move(layout), {}, {}, {}, {}, 5, {}, {}, {}, {}, {}, {}};
  cfg.scenario.robot_start = robot_start;

  const auto f = root.child("fall");
  cfg.fall.d_max = f.number("d_max", cfg.fall.d_max);
  cfg.fall.steepness = f.number("steepness", cfg.fall.steepness);
  cfg.fall.aided_scale = f.number("aided_scale", cfg.fall.aided_scale);
  cfg.fall.aided_floor = f.number("aided_floor", cfg.fall.aided_floor);
  checked(root, "fall", [&] { cfg.fall.validate(); });

  const auto in = root.child("intent");
  cfg.intent.forgetting = in.number("forgetting", cfg.intent.forgetting);
  cfg.intent.prob_floor = in.number("prob_floor", cfg.intent.prob_floor);
  if (in.has("prior")) {
    const auto& pj = in.raw("prior");
    if (!pj.is_object()) in.fail("prior", "expected {goal: weight}");
    std::map<std::string, double> prior;
    for (auto it = pj.begin(); it != pj.end(); ++it) {
      if (!cfg.layout.has_goal(it.key())) in.fail("prior", "unknown goal '" + it.key() + "'");
      if (!it.value().is_number()) in.fail("prior." + it.key(), "expected a number");
      prior[it.key()] = it.value().get<double>();
    }
    for (const auto& g : cfg.layout.goal_ids()) prior.try_emplace(g, 0.0);
    checked(root, "intent.prior", [&] { cfg.intent.prior = intent::IntentBelief(prior); });
  } else {
    cfg.intent.prior = intent::IntentBelief::uniform(cfg.layout.goal_ids());
  }
  checked(root, "intent", [&] { cfg.intent.validate(); });

  const auto g = root.child("gp");
  const auto gi = g.child("init");
  cfg.gp.init.signal_variance = gi.number("signal_variance", cfg.gp.init.signal_variance);
  if (gi.has("length_scales")) {
    cfg.gp.init.length_scales = {gi.point(gi.raw("length_scales"), "length_scales").x,
                                 gi.point(gi.raw("length_scales"), "length_scales").y};
  }
  cfg.gp.init.noise_variance = gi.number("noise_variance", cfg.gp.init.noise_variance);
  cfg.gp.fit.lower_bound = g.number("lower_bound", cfg.gp.fit.lower_bound);
  cfg.gp.fit.upper_bound = g.number("upper_bound", cfg.gp.fit.upper_bound);
  cfg.gp.fit.restarts = static_cast<int>(g.count("restarts", static_cast<std::size_t>(cfg.gp.fit.restarts)));
  cfg.gp.fit.max_evaluations =
      static_cast<int>(g.count("max_evaluations", static_cast<std::size_t>(cfg.gp.fit.max_evaluations)));
  cfg.gp.max_points_per_goal = g.count("max_points_per_goal", cfg.gp.max_points_per_goal);
  checked(root, "gp.init", [&] { cfg.gp.init.validate(); });

  const auto pg = root.child("patientgen");
  auto& p = cfg.patientgen;
  p.support_weight = pg.number("support_weight", p.support_weight);
  p.horizon = pg.count("horizon", p.horizon);
  p.max_step = pg.number("max_step", p.max_step);
  p.smoothing = pg.number("smoothing", p.smoothing);
  p.waypoint_noise = pg.number("waypoint_noise", p.waypoint_noise);
  p.start_jitter = pg.number("start_jitter", p.start_jitter);
  p.observation_noise = pg.number("observation_noise", p.observation_noise);
  p.path_slack = pg.number("path_slack", p.path_slack);
  p.iterations = pg.count("iterations", p.iterations);
  p.clearance = pg.number("clearance", p.clearance);
  p.grid_resolution = pg.number("grid_resolution", p.grid_resolution);
  cfg.dataset_per_pair = pg.count("n_per_pair", cfg.dataset_per_pair);

  const auto pr = root.child("predict");
  cfg.predict.samples = pr.count("samples", cfg.predict.samples);
  cfg.predict.horizon = pr.count("horizon", cfg.predict.horizon);
  cfg.predict.dt = pr.number("dt", cfg.predict.dt);
  checked(root, "predict", [&] { cfg.predict.validate(); });
  p.dt = cfg.predict.dt;
  checked(root, "patientgen", [&] { p.validate(); });

  const auto pl = root.child("planner");
  cfg.planner.rho = pl.number("rho", cfg.planner.rho);
  cfg.planner.reach_eps = pl.number("reach_eps", cfg.planner.reach_eps);
  cfg.planner.robot_speed = pl.number("robot_speed", cfg.planner.robot_speed);
  cfg.planner.risk.tail = pl.number("tail", cfg.planner.risk.tail);
  cfg.planner.risk.beta = pl.number("beta", cfg.planner.risk.beta);
  checked(root, "planner", [&] {
    cfg.planner.method = planner::parse_method(pl.text("method", std::string(to_string(cfg.planner.method))));
    const std::string agg = pl.text("aggregation", "product");
    if (agg == "product") cfg.planner.aggregation = planner::Aggregation::product;
    else if (agg == "sum") cfg.planner.aggregation = planner::Aggregation::sum;
    else throw std::invalid_argument("aggregation must be 'product' or 'sum'");
    cfg.planner.validate();
  });

  const auto c = root.child("cem");
  cfg.cem.n_samples = c.count("n_samples", cfg.cem.n_samples);
  cfg.cem.elite_fraction = c.number("elite_fraction", cfg.cem.elite_fraction);
  cfg.cem.kl_tolerance = c.number("kl_tolerance", cfg.cem.kl_tolerance);
  cfg.cem.max_iters = c.count("max_iters", cfg.cem.max_iters);
  cfg.cem.max_escalations = c.count("max_escalations", cfg.cem.max_escalations);
  checked(root, "cem", [&] { cfg.cem.validate(); });

  const auto s = root.child("scenario");
  cfg.scenario.max_steps = s.count("max_steps", cfg.scenario.max_steps);
  cfg.scenario.replan_stride = std::max<std::size_t>(1, s.count("replan_stride", cfg.scenario.replan_stride));
  cfg.scenario.motion_noise = s.number("motion_noise", cfg.scenario.motion_noise);
  cfg.scenario.aided_support_factor = s.number("aided_support_factor", cfg.scenario.aided_support_factor);
  if (!is_free(cfg.scenario.robot_start, cfg.layout)) root.fail("room.robot_start", "must be a free point");

  const auto bt = root.child("batch");
  cfg.batch.n_scenarios = bt.count("n_scenarios", cfg.batch.n_scenarios);
  cfg.batch.report_tail = bt.number("report_tail", cfg.batch.report_tail);
  if (bt.has("poses")) {
    const auto& arr = bt.raw("poses");
    if (!arr.is_array()) bt.fail("poses", "expected an array of pose names");
    for (const auto& v : arr) {
      if (!v.is_string()) bt.fail("poses", "expected an array of pose names");
      const auto name = v.get<std::string>();
      try {
        cfg.layout.initial_pose(name);
      } catch (const LayoutError&) {
        bt.fail("poses", "unknown initial pose '" + name + "'");
      }
      cfg.batch.poses.push_back(name);
    }
  } else {
    for (const auto& pose : cfg.layout.initial_poses()) cfg.batch.poses.push_back(pose.id);
  }
  if (bt.has("methods")) {
    const auto& arr = bt.raw("methods");
    if (!arr.is_array()) bt.fail("methods", "expected an array of method names");
    for (const auto& v : arr) {
      if (!v.is_string()) bt.fail("methods", "expected an array of method names");
      checked(root, "batch.methods", [&] { cfg.batch.methods.push_back(planner::parse_method(v.get<std::string>())); });
    }
  } else {
    cfg.batch.methods = planner::all_methods();
  }

  std::ostringstream hex;
  hex << std::hex << fnv1a(text);
  cfg.source_hash = hex.str();
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string default_config_path() { return std::string(RISKPLAN_DATA_DIR) + "/default_room.json"; }

planner::PlanningInputs planning_inputs(const Config& cfg, const GpMixture& mixture) {
  planner::PlanningInputs in;
  in.layout = &cfg.layout;
  in.mixture = &mixture;
  in.fall = cfg.fall;
  in.predict = cfg.predict;
  in.planner = cfg.planner;
  in.cem = cfg.cem;
  return in;
}

}  // namespace riskplan
