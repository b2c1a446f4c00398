#include "riskplan/predict.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "riskplan/rng.hpp"

namespace riskplan {

// ---------------------------------------------------------------------------
// GpMixture

void GpMixture::set(const std::string& goal, CoordinateModels models, bool aided) {
  (aided ? aided_ : unaided_)[goal] = std::move(models);
}

std::vector<std::string> GpMixture::goal_ids() const {
  std::vector<std::string> out;
  for (const auto& [goal, m] : unaided_) out.push_back(goal);
  return out;
}

const CoordinateModels& GpMixture::models(const std::string& goal, bool aided) const {
  if (aided) {
    const auto it = aided_.find(goal);
    if (it != aided_.end()) return it->second;
  }
  const auto it = unaided_.find(goal);
  if (it == unaided_.end()) throw MissingModelError("no motion model for goal '" + goal + "'");
  return it->second;
}

double GpMixture::log_transition_density(const std::string& goal, const Point2& prev, const Point2& curr) const {
  const auto& m = models(goal);
  const Point2 delta = curr - prev;
  return gp::log_density(m.x.predict_observation(prev), delta.x) +
         gp::log_density(m.y.predict_observation(prev), delta.y);
}

void GpMixture::require_goals(const std::vector<std::string>& ids) const {
  for (const auto& id : ids) {
    if (!has(id)) throw MissingModelError("no motion model for goal '" + id + "'");
  }
}

GpMixture fit_mixture(const Dataset& data, const std::vector<std::string>& goals, const MixtureFitConfig& cfg) {
  GpMixture mixture;
  for (const auto& goal : goals) {
    std::vector<const TrainingSample*> rows;
    for (const auto& s : data) {
      if (s.goal == goal) rows.push_back(&s);
    }
    if (rows.size() < 2) throw MissingModelError("too little training data for goal '" + goal + "'");

    std::vector<const TrainingSample*> kept;
    if (cfg.max_points_per_goal == 0 || rows.size() <= cfg.max_points_per_goal) {
      kept = rows;
    } else {
      const double stride = static_cast<double>(rows.size()) / static_cast<double>(cfg.max_points_per_goal);
      for (std::size_t i = 0; i < cfg.max_points_per_goal; ++i) {
        kept.push_back(rows[static_cast<std::size_t>(static_cast<double>(i) * stride)]);
      }
    }
    std::vector<Point2> inputs;
    std::vector<double> dx, dy;
    for (const auto* s : kept) {
      inputs.push_back(s->state);
      dx.push_back(s->delta.x);
      dy.push_back(s->delta.y);
    }
    CoordinateModels m;
    m.x = gp::fit(inputs, dx, cfg.init, cfg.fit);
    m.y = gp::fit(inputs, dy, cfg.init, cfg.fit);
    mixture.set(goal, std::move(m));
  }
  return mixture;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr int kMixtureSchemaVersion = 1;

nlohmann::json model_to_json(const gp::Model& m) {
  nlohmann::json j;
  const auto& h = m.hyperparams();
  j["hyperparams"] = {{"signal_variance", h.signal_variance},
                      {"length_scales", {h.length_scales[0], h.length_scales[1]}},
                      {"noise_variance", h.noise_variance}};
  auto inputs = nlohmann::json::array();
  for (const auto& p : m.inputs()) inputs.push_back({p.x, p.y});
  j["inputs"] = std::move(inputs);
  j["targets"] = std::vector<double>(m.targets().data(), m.targets().data() + m.targets().size());
  return j;
}

gp::Model model_from_json(const nlohmann::json& j) {
  gp::Hyperparams h;
  const auto& hj = j.at("hyperparams");
  h.signal_variance = hj.at("signal_variance").get<double>();
  h.length_scales = {hj.at("length_scales").at(0).get<double>(), hj.at("length_scales").at(1).get<double>()};
  h.noise_variance = hj.at("noise_variance").get<double>();
  std::vector<Point2> inputs;
  for (const auto& p : j.at("inputs")) inputs.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  auto targets = j.at("targets").get<std::vector<double>>();
  return gp::Model::condition(std::move(inputs), std::move(targets), h);
}

nlohmann::json set_to_json(const std::map<std::string, CoordinateModels>& set) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [goal, m] : set) out[goal] = {{"x", model_to_json(m.x)}, {"y", model_to_json(m.y)}};
  return out;
}

}  // namespace

void save_mixture(const GpMixture& mixture, const std::string& path) {
  nlohmann::json j;
  j["schema_version"] = kMixtureSchemaVersion;
  j["kind"] = "gp_mixture";
  j["goals"] = set_to_json(mixture.unaided());
  if (mixture.has_aided()) j["aided_goals"] = set_to_json(mixture.aided());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mixture file '" + path + "'");
  out << j.dump(1) << '\n';
}

GpMixture load_mixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read mixture file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("mixture file '" + path + "': " + e.what());
  }
  if (j.value("schema_version", 0) != kMixtureSchemaVersion) {
    throw std::runtime_error("mixture file '" + path + "': unsupported schema_version");
  }
  GpMixture mixture;
  auto read_set = [&](const nlohmann::json& set, bool aided) {
    for (auto it = set.begin(); it != set.end(); ++it) {
      mixture.set(it.key(), {model_from_json(it.value().at("x")), model_from_json(it.value().at("y"))}, aided);
    }
  };
  read_set(j.at("goals"), false);
  if (j.contains("aided_goals")) read_set(j.at("aided_goals"), true);
  return mixture;
}

// ---------------------------------------------------------------------------
// Rollouts

void PredictConfig::validate() const {
  if (samples < 1) throw std::invalid_argument("prediction needs at least one sample");
  if (horizon < 1) throw std::invalid_argument("prediction horizon must be at least one step");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
}

TrajectoryEnsemble rollout(const GpMixture& mixture, const std::string& goal, const Point2& start,
                           std::size_t horizon, std::size_t k, std::uint64_t seed, const Rect& bounds,
                           bool aided) {
  if (horizon < 1 || k < 1) throw std::invalid_argument("rollout needs horizon >= 1 and k >= 1");
  const auto& m = mixture.models(goal, aided);
  TrajectoryEnsemble out;
  out.goal = goal;
  out.trajectories.resize(k);
  const std::uint64_t goal_label = fnv1a(goal);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < k; ++i) {
    Rng rng(derive_seed(seed, {goal_label, i}));
    auto& traj = out.trajectories[i];
    traj.reserve(horizon + 1);
    traj.push_back(start);
    Point2 p = start;
    for (std::size_t t = 0; t < horizon; ++t) {
      const auto gx = m.x.predict_observation(p);
      const auto gy = m.y.predict_observation(p);
      const double dx = gx.mean + std::sqrt(gx.variance) * normal(rng);
      const double dy = gy.mean + std::sqrt(gy.variance) * normal(rng);
      p = bounds.clamp({p.x + dx, p.y + dy});
      traj.push_back(p);
    }
  }
  return out;
}

std::vector<Point2> mean_rollout(const GpMixture& mixture, const std::string& goal, const Point2& start,
                                 std::size_t horizon, const Rect& bounds) {
  const auto& m = mixture.models(goal);
  std::vector<Point2> traj{start};
  Point2 p = start;
  for (std::size_t t = 0; t < horizon; ++t) {
    p = bounds.clamp({p.x + m.x.predict_mean(p), p.y + m.y.predict_mean(p)});
    traj.push_back(p);
  }
  return traj;
}

std::vector<TrajectoryEnsemble> predict_all(const GpMixture& mixture, const intent::IntentBelief& belief,
                                            const Point2& start, std::size_t horizon, std::size_t k,
                                            std::uint64_t seed, const Rect& bounds) {
  std::vector<TrajectoryEnsemble> out;
  out.reserve(belief.size());
  for (const auto& [goal, p] : belief.probs()) {
    auto e = rollout(mixture, goal, start, horizon, k, seed, bounds);
    e.weight = p;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace riskplan
