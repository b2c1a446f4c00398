#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "riskplan/fallmodel.hpp"
#include "riskplan/intent.hpp"
#include "riskplan/predict.hpp"
#include "riskplan/risk.hpp"
#include "riskplan/room.hpp"

namespace riskplan::planner {

/// Fall-prevention strategies compared by the harness.
enum class Method { none, deterministic, expected, cvar, expected_cvar };

std::string_view to_string(Method m);
/// Throws std::invalid_argument for unknown names.
Method parse_method(std::string_view name);
const std::vector<Method>& all_methods();

/// How per-step optimalities combine along a trajectory: `product` is
/// exp(-sum of penalties); `sum` adds the per-step exponentials as written in
/// the literal objective.
enum class Aggregation { product, sum };

struct InterventionCandidate {
  Point2 pose;
  std::size_t time_index = 0;
};

struct PlannerConfig {
  /// Weight of the robot travel cost.
  double rho = 0.05;
  /// Handover radius between walker and patient, meters.
  double reach_eps = 0.5;
  double robot_speed = 0.5;
  risk::RiskConfig risk;
  Method method = Method::expected_cvar;
  Aggregation aggregation = Aggregation::product;

  void validate() const;
};

struct CemConfig {
  std::size_t n_samples = 100;
  double elite_fraction = 0.1;
  double kl_tolerance = 0.2;
  std::size_t max_iters = 12;
  /// Initial sampling distribution over (x, y, time index). Unset:
  /// cem_optimize covers the whole room and horizon, plan_cem centres it on
  /// the predicted patient states.
  std::optional<std::array<double, 3>> init_mean;
  std::optional<std::array<double, 3>> init_std;
  std::array<double, 3> min_std{0.02, 0.02, 0.25};
  /// Replaces the first iteration's Gaussian draws (up to n_samples of them).
  /// plan_cem fills it with predicted patient states when empty.
  std::vector<InterventionCandidate> initial_samples;
  std::size_t max_escalations = 3;

  void validate() const;
};

struct InterventionPlan {
  InterventionCandidate candidate;
  double log_objective = -std::numeric_limits<double>::infinity();
  std::map<std::string, double> goal_log_optimality;
  double patient_log_optimality = 0.0;
  double robot_log_optimality = 0.0;
  bool feasible = false;
  std::size_t iterations = 0;
};

/// Everything a planning call reads besides the belief and the two poses.
struct PlanningInputs {
  const RoomLayout* layout = nullptr;
  const GpMixture* mixture = nullptr;
  fall::FallParams fall;
  PredictConfig predict;
  PlannerConfig planner;
  CemConfig cem;
};

/// -rho * travel distance when the robot can reach the pose by time_index * dt,
/// -infinity otherwise.
double robot_log_optimality(const InterventionCandidate& cand, const Point2& robot_pose, const PlannerConfig& cfg,
                            double dt);

/// Risk-weighted log probability that the patient's motion is optimal under
/// this intervention, mixed over goals by ensemble weight.
double patient_log_optimality(const std::vector<TrajectoryEnsemble>& ensembles, const InterventionCandidate& cand,
                              const fall::FallParams& fall, const RoomLayout& layout, const PlannerConfig& cfg);

struct ObjectiveValue {
  double total = -std::numeric_limits<double>::infinity();
  double patient = 0.0;
  double robot = 0.0;
  std::map<std::string, double> per_goal;
};

/// Objective over a fixed set of predicted ensembles, with fall scores
/// cached so each candidate costs O(goals * K * horizon).
class ObjectiveEvaluator {
 public:
  ObjectiveEvaluator(std::vector<TrajectoryEnsemble> ensembles, const RoomLayout& layout,
                     const fall::FallParams& fall, const PlannerConfig& cfg, const Point2& robot_pose, double dt);

  /// Total log objective; -infinity for infeasible candidates.
  double operator()(const InterventionCandidate& cand) const;
  ObjectiveValue evaluate(const InterventionCandidate& cand) const;

  const std::vector<TrajectoryEnsemble>& ensembles() const { return ensembles_; }
  std::size_t horizon() const;

 private:
  struct GoalCache {
    std::vector<std::vector<double>> unaided;  // [k][t]
    std::vector<std::vector<double>> aided;
    std::vector<double> all_unaided_penalty;    // [t]
    std::vector<double> all_aided_penalty;
  };

  double step_penalty(std::span<double> scores) const;
  double goal_log_value(std::size_t g, const InterventionCandidate& cand) const;
  double patient(const InterventionCandidate& cand, std::map<std::string, double>* per_goal) const;

  std::vector<TrajectoryEnsemble> ensembles_;
  const RoomLayout* layout_;
  PlannerConfig cfg_;
  Point2 robot_pose_;
  double dt_;
  std::vector<GoalCache> cache_;
  mutable std::vector<double> scratch_;
  mutable std::vector<std::size_t> handover_scratch_;
};

/// Objective for one candidate with ensembles drawn from `seed`; identical
/// seeds give identical ensembles, so candidates share random numbers.
double objective(const InterventionCandidate& cand, const intent::IntentBelief& belief, const Point2& start,
                 const Point2& robot_pose, const PlanningInputs& in, std::uint64_t seed);

/// Baseline: search along the mean prediction for the most probable goal.
InterventionPlan plan_deterministic(const intent::IntentBelief& belief, const Point2& start,
                                    const Point2& robot_pose, const PlanningInputs& in);

/// Cross-entropy search over (x, y, time index) on the probabilistic objective.
InterventionPlan plan_cem(const intent::IntentBelief& belief, const Point2& start, const Point2& robot_pose,
                          const PlanningInputs& in, std::uint64_t seed);

/// Dispatches on in.planner.method; `none` yields no plan.
std::optional<InterventionPlan> plan(const intent::IntentBelief& belief, const Point2& start,
                                     const Point2& robot_pose, const PlanningInputs& in, std::uint64_t seed);

// --- cross-entropy method --------------------------------------------------

struct CemSpace {
  Rect bounds;
  std::size_t max_time = 0;
};

struct CemResult {
  InterventionCandidate best;
  double best_value = -std::numeric_limits<double>::infinity();
  bool feasible = false;
  std::array<double, 3> mean{};
  std::array<double, 3> stddev{};
  std::size_t iterations = 0;
  std::size_t elites_per_iteration = 0;
  std::vector<double> kl_trace;
};

/// ceil(gamma * n), guarded against floating-point noise in the product.
std::size_t elite_count(double gamma, std::size_t n);

/// KL(p || q) for diagonal Gaussians.
double kl_diagonal(const std::array<double, 3>& mean_p, const std::array<double, 3>& std_p,
                   const std::array<double, 3>& mean_q, const std::array<double, 3>& std_q);

/// Maximizes `f`; -infinity marks infeasible samples, which never become elites.
CemResult cem_optimize(const std::function<double(const InterventionCandidate&)>& f, const CemSpace& space,
                       const CemConfig& cfg, std::uint64_t seed);

}  // namespace riskplan::planner
