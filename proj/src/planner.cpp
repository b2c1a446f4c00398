#include "riskplan/planner.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "riskplan/rng.hpp"

namespace riskplan::planner {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const std::vector<std::pair<double, double>>& weighted_logs) {
  double best = kNegInf;
  for (const auto& [w, l] : weighted_logs) {
    if (w > 0.0) best = std::max(best, l);
  }
  if (!std::isfinite(best)) return kNegInf;
  double acc = 0.0;
  for (const auto& [w, l] : weighted_logs) {
    if (w > 0.0) acc += w * std::exp(l - best);
  }
  return best + std::log(acc);
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::none: return "none";
    case Method::deterministic: return "deterministic";
    case Method::expected: return "expected";
    case Method::cvar: return "cvar";
    case Method::expected_cvar: return "expected_cvar";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : all_methods()) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument("unknown method '" + std::string(name) +
                              "' (expected none|deterministic|expected|cvar|expected_cvar)");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods{Method::none, Method::deterministic, Method::expected, Method::cvar,
                                           Method::expected_cvar};
  return methods;
}

void PlannerConfig::validate() const {
  if (!(rho >= 0.0) || !(reach_eps >= 0.0)) throw std::invalid_argument("planner: rho and reach_eps must be >= 0");
  if (!(robot_speed > 0.0)) throw std::invalid_argument("planner: robot_speed must be positive");
  risk.validate();
}

void CemConfig::validate() const {
  if (n_samples < 10) throw std::invalid_argument("cem: n_samples must be >= 10");
  if (!(elite_fraction > 0.0 && elite_fraction < 1.0)) throw std::invalid_argument("cem: elite_fraction must lie in (0, 1)");
  if (!(kl_tolerance > 0.0)) throw std::invalid_argument("cem: kl_tolerance must be positive");
  if (max_iters < 1) throw std::invalid_argument("cem: max_iters must be >= 1");
}

double robot_log_optimality(const InterventionCandidate& cand, const Point2& robot_pose, const PlannerConfig& cfg,
                            double dt) {
  const double travel = distance(robot_pose, cand.pose);
  const double reach = cfg.robot_speed * static_cast<double>(cand.time_index) * dt;
  if (travel > reach + 1e-9) return kNegInf;
  return cfg.rho == 0.0 ? 0.0 : -cfg.rho * travel;
}

// ---------------------------------------------------------------------------
// ObjectiveEvaluator

ObjectiveEvaluator::ObjectiveEvaluator(std::vector<TrajectoryEnsemble> ensembles, const RoomLayout& layout,
                                       const fall::FallParams& fall, const PlannerConfig& cfg,
                                       const Point2& robot_pose, double dt)
    : ensembles_(std::move(ensembles)), layout_(&layout), cfg_(cfg), robot_pose_(robot_pose), dt_(dt) {
  if (ensembles_.empty()) throw std::invalid_argument("objective needs at least one ensemble");
  const std::size_t steps = ensembles_.front().steps();
  for (const auto& e : ensembles_) {
    if (e.samples() == 0 || e.steps() != steps) throw std::invalid_argument("ensembles must share shape and be nonempty");
  }
  cache_.resize(ensembles_.size());
  for (std::size_t g = 0; g < ensembles_.size(); ++g) {
    const auto& e = ensembles_[g];
    auto& c = cache_[g];
    c.unaided.assign(e.samples(), std::vector<double>(steps));
    c.aided.assign(e.samples(), std::vector<double>(steps));
    for (std::size_t k = 0; k < e.samples(); ++k) {
      for (std::size_t t = 0; t < steps; ++t) {
        const double u = fall::score_unaided(e.trajectories[k][t], layout, fall);
        c.unaided[k][t] = u;
        c.aided[k][t] = fall::aided_from_unaided(u, fall);
      }
    }
    std::vector<double> col(e.samples());
    c.all_unaided_penalty.resize(steps);
    c.all_aided_penalty.resize(steps);
    for (std::size_t t = 0; t < steps; ++t) {
      for (std::size_t k = 0; k < e.samples(); ++k) col[k] = c.unaided[k][t];
      c.all_unaided_penalty[t] = step_penalty(col);
      for (std::size_t k = 0; k < e.samples(); ++k) col[k] = c.aided[k][t];
      c.all_aided_penalty[t] = step_penalty(col);
    }
  }
}

std::size_t ObjectiveEvaluator::horizon() const { return ensembles_.front().steps() - 1; }

double ObjectiveEvaluator::step_penalty(std::span<double> scores) const {
  const auto n = static_cast<double>(scores.size());
  double mean = 0.0;
  for (double s : scores) mean += s / n;
  const double beta = cfg_.risk.beta;
  switch (cfg_.method) {
    case Method::expected:
      return mean;
    case Method::cvar:
      return beta * risk::cvar_uniform(scores, cfg_.risk.tail);
    default:
      return beta == 0.0 ? mean : mean + beta * risk::cvar_uniform(scores, cfg_.risk.tail);
  }
}

double ObjectiveEvaluator::goal_log_value(std::size_t g, const InterventionCandidate& cand) const {
  const auto& e = ensembles_[g];
  const auto& c = cache_[g];
  const std::size_t steps = e.steps();
  const std::size_t never = steps;
  const double eps2 = cfg_.reach_eps * cfg_.reach_eps;

  // First step at or after the planned time where the sample passes within reach.
  std::vector<std::size_t>& handover = handover_scratch_;
  handover.assign(e.samples(), never);
  std::size_t first = never, last = 0;
  for (std::size_t k = 0; k < e.samples(); ++k) {
    const auto& traj = e.trajectories[k];
    for (std::size_t t = cand.time_index; t < steps; ++t) {
      if ((traj[t] - cand.pose).squared_norm() <= eps2) {
        handover[k] = t;
        break;
      }
    }
    first = std::min(first, handover[k]);
    last = std::max(last, handover[k]);
  }

  scratch_.resize(e.samples());
  double penalty_sum = 0.0;
  double exp_sum = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    double pen;
    if (t < first) {
      pen = c.all_unaided_penalty[t];
    } else if (t >= last) {
      pen = c.all_aided_penalty[t];
    } else {
      for (std::size_t k = 0; k < e.samples(); ++k) scratch_[k] = t < handover[k] ? c.unaided[k][t] : c.aided[k][t];
      pen = step_penalty(scratch_);
    }
    penalty_sum += pen;
    exp_sum += std::exp(-pen);
  }
  return cfg_.aggregation == Aggregation::product ? -penalty_sum : std::log(exp_sum);
}

double ObjectiveEvaluator::patient(const InterventionCandidate& cand, std::map<std::string, double>* per_goal) const {
  std::vector<std::pair<double, double>> terms;
  terms.reserve(ensembles_.size());
  for (std::size_t g = 0; g < ensembles_.size(); ++g) {
    const double v = goal_log_value(g, cand);
    if (per_goal) (*per_goal)[ensembles_[g].goal] = v;
    terms.emplace_back(ensembles_[g].weight, v);
  }
  return log_sum_exp(terms);
}

double ObjectiveEvaluator::operator()(const InterventionCandidate& cand) const {
  if (cand.time_index > horizon() || !is_free(cand.pose, *layout_)) return kNegInf;
  const double robot = robot_log_optimality(cand, robot_pose_, cfg_, dt_);
  if (!std::isfinite(robot)) return kNegInf;
  return patient(cand, nullptr) + robot;
}

ObjectiveValue ObjectiveEvaluator::evaluate(const InterventionCandidate& cand) const {
  ObjectiveValue v;
  const std::size_t clamped = std::min(cand.time_index, horizon());
  v.patient = patient({cand.pose, clamped}, &v.per_goal);
  const bool valid = cand.time_index <= horizon() && is_free(cand.pose, *layout_);
  v.robot = valid ? robot_log_optimality(cand, robot_pose_, cfg_, dt_) : kNegInf;
  v.total = v.patient + v.robot;
  return v;
}

double patient_log_optimality(const std::vector<TrajectoryEnsemble>& ensembles, const InterventionCandidate& cand,
                              const fall::FallParams& fall, const RoomLayout& layout, const PlannerConfig& cfg) {
  ObjectiveEvaluator eval(ensembles, layout, fall, cfg, cand.pose, 1.0);
  return eval.evaluate(cand).patient;
}

// ---------------------------------------------------------------------------
// Planning entry points

namespace {

ObjectiveEvaluator make_evaluator(const intent::IntentBelief& belief, const Point2& start, const Point2& robot_pose,
                                  const PlanningInputs& in, std::uint64_t seed) {
  auto ensembles = predict_all(*in.mixture, belief, start, in.predict.horizon, in.predict.samples, seed,
                               in.layout->bounds());
  return ObjectiveEvaluator(std::move(ensembles), *in.layout, in.fall, in.planner, robot_pose, in.predict.dt);
}

InterventionPlan to_plan(const InterventionCandidate& cand, const ObjectiveValue& v, std::size_t iterations) {
  InterventionPlan p;
  p.candidate = cand;
  p.log_objective = v.total;
  p.goal_log_optimality = v.per_goal;
  p.patient_log_optimality = v.patient;
  p.robot_log_optimality = v.robot;
  p.feasible = std::isfinite(v.total);
  p.iterations = iterations;
  return p;
}

// First samples are predicted patient states paired with the robot's earliest
// arrival there; the fallback Gaussian is centred on the same states.
CemConfig seeded_cem(const CemConfig& base, const std::vector<TrajectoryEnsemble>& ensembles, std::size_t horizon,
                     const Point2& robot_pose, double robot_step, std::uint64_t seed) {
  CemConfig cfg = base;
  if (cfg.initial_samples.empty() && horizon > 0 && !ensembles.empty()) {
    // Goals are drawn uniformly: a cheap handover on an unlikely branch can still dominate the mixture.
    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> pick_goal(0, ensembles.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_t(1, horizon);
    for (std::size_t i = 0; i < cfg.n_samples; ++i) {
      const auto& e = ensembles[pick_goal(rng)];
      const auto& traj = e.trajectories[std::uniform_int_distribution<std::size_t>(0, e.samples() - 1)(rng)];
      const Point2 pose = traj[pick_t(rng)];
      const double arrival = robot_step > 0.0 ? std::ceil(distance(robot_pose, pose) / robot_step - 1e-9) : 0.0;
      cfg.initial_samples.push_back({pose, static_cast<std::size_t>(std::clamp(arrival, 0.0, double(horizon)))});
    }
  }
  if (cfg.init_mean && cfg.init_std) return cfg;
  double w_sum = 0.0, mx = 0.0, my = 0.0, sxx = 0.0, syy = 0.0;
  for (const auto& e : ensembles) {
    if (e.weight <= 0.0) continue;
    const double w = e.weight / static_cast<double>(e.samples());
    for (const auto& traj : e.trajectories) {
      for (std::size_t t = 1; t < traj.size(); ++t) {
        w_sum += w;
        mx += w * traj[t].x;
        my += w * traj[t].y;
        sxx += w * traj[t].x * traj[t].x;
        syy += w * traj[t].y * traj[t].y;
      }
    }
  }
  if (!(w_sum > 0.0)) return cfg;
  mx /= w_sum;
  my /= w_sum;
  const double sx = std::sqrt(std::max(sxx / w_sum - mx * mx, 0.0));
  const double sy = std::sqrt(std::max(syy / w_sum - my * my, 0.0));
  const double tmax = static_cast<double>(horizon);
  if (!cfg.init_mean) cfg.init_mean = std::array<double, 3>{mx, my, 0.5 * tmax};
  if (!cfg.init_std) cfg.init_std = std::array<double, 3>{std::max(sx, 0.25), std::max(sy, 0.25), std::max(0.5 * tmax, 1.0)};
  return cfg;
}

}  // namespace

double objective(const InterventionCandidate& cand, const intent::IntentBelief& belief, const Point2& start,
                 const Point2& robot_pose, const PlanningInputs& in, std::uint64_t seed) {
  return make_evaluator(belief, start, robot_pose, in, seed)(cand);
}

InterventionPlan plan_deterministic(const intent::IntentBelief& belief, const Point2& start,
                                    const Point2& robot_pose, const PlanningInputs& in) {
  const std::string goal = intent::map_goal(belief);
  const auto traj = mean_rollout(*in.mixture, goal, start, in.predict.horizon, in.layout->bounds());
  const std::size_t n = traj.size();
  std::vector<double> unaided(n), aided(n);
  for (std::size_t t = 0; t < n; ++t) {
    unaided[t] = fall::score_unaided(traj[t], *in.layout, in.fall);
    aided[t] = fall::aided_from_unaided(unaided[t], in.fall);
  }
  // suffix_aided[t] = sum_{s >= t} aided[s]
  std::vector<double> suffix_aided(n + 1, 0.0);
  for (std::size_t t = n; t-- > 0;) suffix_aided[t] = suffix_aided[t + 1] + aided[t];

  InterventionPlan best;
  best.goal_log_optimality[goal] = kNegInf;
  double best_cost = std::numeric_limits<double>::infinity();
  double prefix_unaided = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const InterventionCandidate cand{traj[t], t};
    const double robot = robot_log_optimality(cand, robot_pose, in.planner, in.predict.dt);
    const double fall_cost = prefix_unaided + suffix_aided[t];
    prefix_unaided += unaided[t];
    if (!std::isfinite(robot) || !is_free(cand.pose, *in.layout)) continue;
    const double cost = fall_cost - robot;
    // Prefix and suffix sums round differently; near-equal costs count as ties.
    if (cost < best_cost - 1e-12 * std::max(1.0, std::abs(cost))) {
      best_cost = cost;
      best.candidate = cand;
      best.patient_log_optimality = -fall_cost;
      best.robot_log_optimality = robot;
      best.log_objective = -cost;
      best.goal_log_optimality[goal] = -fall_cost;
      best.feasible = true;
    }
  }
  return best;
}

InterventionPlan plan_cem(const intent::IntentBelief& belief, const Point2& start, const Point2& robot_pose,
                          const PlanningInputs& in, std::uint64_t seed) {
  const auto eval = make_evaluator(belief, start, robot_pose, in, seed);
  const CemSpace space{in.layout->bounds(), eval.horizon()};
  const auto result = cem_optimize([&](const InterventionCandidate& c) { return eval(c); }, space,
                                   seeded_cem(in.cem, eval.ensembles(), eval.horizon(), robot_pose,
                                              in.planner.robot_speed * in.predict.dt, derive_seed(seed, {0x696e6974ULL})),
                                   derive_seed(seed, {0x63656dULL}));
  if (!result.feasible) {
    InterventionPlan p;
    p.iterations = result.iterations;
    return p;
  }
  // The objective is flat in I until the first predicted handover, so report the earliest equally good time.
  InterventionCandidate best = result.best;
  const double best_value = eval(best);
  for (std::size_t i = 0; i < result.best.time_index; ++i) {
    const InterventionCandidate c{best.pose, i};
    if (eval(c) >= best_value) {
      best = c;
      break;
    }
  }
  return to_plan(best, eval.evaluate(best), result.iterations);
}

std::optional<InterventionPlan> plan(const intent::IntentBelief& belief, const Point2& start,
                                     const Point2& robot_pose, const PlanningInputs& in, std::uint64_t seed) {
  switch (in.planner.method) {
    case Method::none: return std::nullopt;
    case Method::deterministic: return plan_deterministic(belief, start, robot_pose, in);
    default: return plan_cem(belief, start, robot_pose, in, seed);
  }
}

}  // namespace riskplan::planner
