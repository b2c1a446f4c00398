#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "riskplan/dataset.hpp"
#include "riskplan/gp.hpp"

namespace riskplan {

class MissingModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Independent x and y delta models for one goal.
struct CoordinateModels {
  gp::Model x;
  gp::Model y;
};

/// Per-goal GP motion models, optionally with a second set for the patient
/// walking with the aid.
class GpMixture {
 public:
  void set(const std::string& goal, CoordinateModels models, bool aided = false);

  bool has(const std::string& goal) const { return unaided_.count(goal) > 0; }
  bool has_aided() const { return !aided_.empty(); }
  std::vector<std::string> goal_ids() const;

  /// Throws MissingModelError for unknown goals. The aided set falls back to
  /// the unaided one when absent.
  const CoordinateModels& models(const std::string& goal, bool aided = false) const;

  /// log p(curr | prev, goal) as the product of the per-coordinate one-step
  /// predictive densities of the delta.
  double log_transition_density(const std::string& goal, const Point2& prev, const Point2& curr) const;

  /// Throws MissingModelError unless every id has a model pair.
  void require_goals(const std::vector<std::string>& ids) const;

  const std::map<std::string, CoordinateModels>& unaided() const { return unaided_; }
  const std::map<std::string, CoordinateModels>& aided() const { return aided_; }

 private:
  std::map<std::string, CoordinateModels> unaided_;
  std::map<std::string, CoordinateModels> aided_;
};

struct MixtureFitConfig {
  gp::Hyperparams init;
  gp::FitConfig fit;
  /// Training pairs per goal are thinned to at most this many by even striding.
  std::size_t max_points_per_goal = 120;
};

/// Fits one x/y model pair per goal from a motion dataset.
GpMixture fit_mixture(const Dataset& data, const std::vector<std::string>& goals,
                      const MixtureFitConfig& cfg);

void save_mixture(const GpMixture& mixture, const std::string& path);
GpMixture load_mixture(const std::string& path);

}  // namespace riskplan
