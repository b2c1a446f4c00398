#pragma once

#include <map>
#include <string>
#include <vector>

#include "riskplan/mixture.hpp"

namespace riskplan::intent {

/// Normalized probabilities over goal ids, ordered by id.
class IntentBelief {
 public:
  IntentBelief() = default;
  /// Normalizes `probs`; throws on negative, non-finite or all-zero input.
  explicit IntentBelief(std::map<std::string, double> probs);

  static IntentBelief uniform(const std::vector<std::string>& goals);

  const std::map<std::string, double>& probs() const { return probs_; }
  double operator[](const std::string& goal) const;
  std::vector<std::string> goals() const;
  std::size_t size() const { return probs_.size(); }

 private:
  std::map<std::string, double> probs_;
};

struct IntentConfig {
  /// Forgetting factor; the previous belief enters with exponent 1 - forgetting.
  double forgetting = 0.1;
  /// Scores below prob_floor * max score are raised to it before normalizing.
  double prob_floor = 1e-6;
  IntentBelief prior;

  void validate() const;
};

struct UpdateResult {
  IntentBelief belief;
  /// True when every goal's score was degenerate and the prior was returned.
  bool fell_back_to_prior = false;
};

/// One recursive Bayes step from per-goal log-likelihoods of the observation.
UpdateResult update_from_log_likelihoods(const IntentBelief& belief,
                                         const std::map<std::string, double>& log_likelihoods,
                                         const IntentConfig& cfg);

/// One recursive Bayes step for the observed transition prev -> curr, with
/// likelihoods from the mixture's one-step densities.
UpdateResult update(const IntentBelief& belief, const Point2& prev, const Point2& curr,
                    const GpMixture& mixture, const IntentConfig& cfg);

/// Most probable goal; exact ties go to the lexicographically smallest id.
std::string map_goal(const IntentBelief& belief);

}  // namespace riskplan::intent
