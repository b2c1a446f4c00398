#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riskplan/intent.hpp"
#include "riskplan/mixture.hpp"

namespace riskplan {

struct PredictConfig {
  std::size_t samples = 50;  // K
  std::size_t horizon = 40;  // steps
  double dt = 0.4;           // seconds per step

  void validate() const;
};

/// K sampled futures for one goal. Every trajectory has horizon + 1 states
/// and starts at the same current state.
struct TrajectoryEnsemble {
  std::string goal;
  std::vector<std::vector<Point2>> trajectories;
  double weight = 0.0;

  std::size_t samples() const { return trajectories.size(); }
  std::size_t steps() const { return trajectories.empty() ? 0 : trajectories.front().size(); }
};

/// Open-loop Monte Carlo rollout: each trajectory feeds its own sampled state
/// back into the goal's GP pair. States are clamped to `bounds`.
TrajectoryEnsemble rollout(const GpMixture& mixture, const std::string& goal, const Point2& start,
                           std::size_t horizon, std::size_t k, std::uint64_t seed, const Rect& bounds,
                           bool aided = false);

/// Rollout using the predictive means only (no sampling).
std::vector<Point2> mean_rollout(const GpMixture& mixture, const std::string& goal, const Point2& start,
                                 std::size_t horizon, const Rect& bounds);

/// One ensemble per goal in the belief, weighted by its probability.
std::vector<TrajectoryEnsemble> predict_all(const GpMixture& mixture, const intent::IntentBelief& belief,
                                            const Point2& start, std::size_t horizon, std::size_t k,
                                            std::uint64_t seed, const Rect& bounds);

}  // namespace riskplan
