#pragma once

#include <vector>

#include "riskplan/room.hpp"

namespace riskplan::fall {

/// Parameters of the distance-to-support fall score surrogate.
struct FallParams {
  /// Support distance at which the unaided score saturates at 1.
  double d_max = 2.0;
  double steepness = 6.0;
  /// Multiplier applied while the patient holds the walker.
  double aided_scale = 0.3;
  double aided_floor = 0.05;

  void validate() const;
};

/// Logistic in normalized support distance, rescaled to hit 0 at a support
/// and 1 at d_max.
double score_unaided(const Point2& p, const RoomLayout& layout, const FallParams& params);

/// max(aided_floor, aided_scale * score_unaided).
double score_aided(const Point2& p, const RoomLayout& layout, const FallParams& params);

/// Score of an unaided state, given the support distance directly.
double unaided_from_distance(double d, const FallParams& params);
double aided_from_unaided(double unaided, const FallParams& params);

/// Per-state scores along `traj`; states before `intervention_index` are
/// unaided and the rest aided. intervention_index == traj.size() means the
/// walker never arrives.
std::vector<double> trajectory_scores(const Trajectory& traj, std::size_t intervention_index,
                                      const RoomLayout& layout, const FallParams& params);

}  // namespace riskplan::fall
