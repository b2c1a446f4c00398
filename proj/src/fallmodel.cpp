#include "riskplan/fallmodel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace riskplan::fall {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

void FallParams::validate() const {
  if (!(d_max > 0.0)) throw std::invalid_argument("fall model: d_max must be positive");
  if (!(steepness > 0.0)) throw std::invalid_argument("fall model: steepness must be positive");
  if (!(aided_floor >= 0.0 && aided_floor <= aided_scale && aided_scale <= 1.0)) {
    throw std::invalid_argument("fall model: need 0 <= aided_floor <= aided_scale <= 1");
  }
}

double unaided_from_distance(double d, const FallParams& params) {
  if (d >= params.d_max) return 1.0;
  if (d <= 0.0) return 0.0;
  const double lo = logistic(-0.5 * params.steepness);
  const double hi = logistic(0.5 * params.steepness);
  const double raw = logistic(params.steepness * (d / params.d_max - 0.5));
  return std::clamp((raw - lo) / (hi - lo), 0.0, 1.0);
}

double aided_from_unaided(double unaided, const FallParams& params) {
  return std::max(params.aided_floor, params.aided_scale * unaided);
}

double score_unaided(const Point2& p, const RoomLayout& layout, const FallParams& params) {
  return unaided_from_distance(distance_to_nearest_support(p, layout, params.d_max), params);
}

double score_aided(const Point2& p, const RoomLayout& layout, const FallParams& params) {
  return aided_from_unaided(score_unaided(p, layout, params), params);
}

std::vector<double> trajectory_scores(const Trajectory& traj, std::size_t intervention_index,
                                      const RoomLayout& layout, const FallParams& params) {
  if (intervention_index > traj.size()) {
    throw std::invalid_argument("trajectory_scores: intervention index past the trajectory end");
  }
  std::vector<double> out;
  out.reserve(traj.size());
  for (std::size_t t = 0; t < traj.size(); ++t) {
    out.push_back(t < intervention_index ? score_unaided(traj.states[t], layout, params)
                                         : score_aided(traj.states[t], layout, params));
  }
  return out;
}

}  // namespace riskplan::fall
