#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "riskplan/dataset.hpp"
#include "riskplan/room.hpp"

namespace riskplan::patientgen {

struct PatientGenConfig {
  /// Weight on the squared nearest-support distance.
  double support_weight = 1.0;
  /// Cost horizon h; trajectories are padded with their final state up to h.
  std::size_t horizon = 150;
  /// Velocity limit, meters per step.
  double max_step = 0.15;
  /// Weight on squared second differences.
  double smoothing = 1.0;
  double dt = 0.4;
  /// Std of the seeded waypoint perturbation (0 disables it).
  double waypoint_noise = 0.05;
  /// Std of the seeded start-pose jitter used by generate_dataset.
  double start_jitter = 0.1;
  /// Std of the per-axis position noise generate_dataset adds to interior
  /// states, clipped to a norm of 3 std. Steps then stay within
  /// max_step + 6 * observation_noise.
  double observation_noise = 0.02;
  /// Waypoint budget relative to the shortest route at full speed.
  double path_slack = 1.5;
  std::size_t iterations = 400;
  /// Obstacle inflation used by the router and the projection.
  double clearance = 0.05;
  double grid_resolution = 0.1;

  void validate() const;
};

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// J = sum_t (|z_t - goal|^2 + support_weight * d_t^2) + smoothing * sum_t |z_{t+1} - 2 z_t + z_{t-1}|^2,
/// over t = 1..horizon with the trajectory padded by its final state.
double trajectory_cost(const Trajectory& traj, const Point2& goal, const RoomLayout& layout,
                       const PatientGenConfig& cfg);

/// Shortest collision-free route (straight when possible, otherwise grid A*
/// with string pulling), walked at full speed and ending exactly at the goal.
Trajectory straight_baseline(const Point2& start, const Point2& goal, const RoomLayout& layout,
                             const PatientGenConfig& cfg);

/// Locally optimal patient path from start to the named goal. Throws
/// GenerationError when no route exists.
Trajectory generate(const Point2& start, const std::string& goal, const RoomLayout& layout,
                    const PatientGenConfig& cfg, std::uint64_t seed);

/// Same as generate() but toward an arbitrary free point.
Trajectory generate_to(const Point2& start, const Point2& goal, const RoomLayout& layout,
                       const PatientGenConfig& cfg, std::uint64_t seed);

/// n_per_pair perturbed trajectories for every (initial pose, goal) pair,
/// observed with position noise and flattened to one-step training samples.
Dataset generate_dataset(const RoomLayout& layout, std::size_t n_per_pair, const PatientGenConfig& cfg,
                         std::uint64_t seed);

}  // namespace riskplan::patientgen
