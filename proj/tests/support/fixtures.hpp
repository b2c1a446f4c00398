#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "riskplan/config.hpp"
#include "riskplan/harness.hpp"

namespace fixtures {

/// Open 10 x 10 room with one goal and one start, no obstacles.
inline riskplan::RoomLayout open_room(std::vector<riskplan::Point2> supports = {}) {
  return riskplan::RoomLayout({0, 0, 10, 10}, {}, std::move(supports), {{"a", {9, 9}}, {"b", {1, 9}}},
                              {{"start", {1, 1}}});
}

inline const riskplan::Config& default_config() {
  static const riskplan::Config cfg = riskplan::load_config(riskplan::default_config_path());
  return cfg;
}

/// Default room with its mixture trained once per process.
inline const riskplan::harness::Context& default_context() {
  static const riskplan::harness::Context ctx{default_config(),
                                              riskplan::harness::train_mixture(default_config(), 1)};
  return ctx;
}

/// Distance from a single support at which the unaided score equals s.
inline double distance_for_score(double s, const riskplan::fall::FallParams& p) {
  const auto logistic = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  const double lo = logistic(-0.5 * p.steepness);
  const double hi = logistic(0.5 * p.steepness);
  const double raw = lo + s * (hi - lo);
  return p.d_max * (0.5 + std::log(raw / (1.0 - raw)) / p.steepness);
}

}  // namespace fixtures
