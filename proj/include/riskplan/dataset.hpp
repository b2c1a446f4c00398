#pragma once

#include <string>
#include <vector>

#include "riskplan/room.hpp"

namespace riskplan {

/// One-step motion sample: state, the delta to the next state, and the goal
/// the generating trajectory was heading for.
struct TrainingSample {
  Point2 state;
  Point2 delta;
  std::string goal;
  std::size_t trajectory = 0;
  std::size_t t = 0;
};

using Dataset = std::vector<TrainingSample>;

void write_dataset_csv(const Dataset& data, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

}  // namespace riskplan
