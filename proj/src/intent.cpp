#include "riskplan/intent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace riskplan::intent {

IntentBelief::IntentBelief(std::map<std::string, double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw std::invalid_argument("belief needs at least one goal");
  double total = 0.0;
  for (const auto& [goal, p] : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("belief probability for '" + goal + "' is invalid");
    }
    total += p;
  }
  if (!(total > 0.0)) throw std::invalid_argument("belief probabilities sum to zero");
  for (auto& [goal, p] : probs_) p /= total;
}

IntentBelief IntentBelief::uniform(const std::vector<std::string>& goals) {
  std::map<std::string, double> probs;
  for (const auto& g : goals) probs[g] = 1.0;
  return IntentBelief(std::move(probs));
}

double IntentBelief::operator[](const std::string& goal) const {
  const auto it = probs_.find(goal);
  if (it == probs_.end()) throw std::out_of_range("belief has no goal '" + goal + "'");
  return it->second;
}

std::vector<std::string> IntentBelief::goals() const {
  std::vector<std::string> out;
  for (const auto& [goal, p] : probs_) out.push_back(goal);
  return out;
}

void IntentConfig::validate() const {
  if (!(forgetting >= 0.0 && forgetting < 1.0)) throw std::invalid_argument("forgetting factor must lie in [0, 1)");
  if (!(prob_floor > 0.0 && prob_floor <= 1e-3)) throw std::invalid_argument("prob_floor must lie in (0, 1e-3]");
}

UpdateResult update_from_log_likelihoods(const IntentBelief& belief,
                                         const std::map<std::string, double>& log_likelihoods,
                                         const IntentConfig& cfg) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  const double keep = 1.0 - cfg.forgetting;

  std::map<std::string, double> log_score;
  double best = kNegInf;
  for (const auto& [goal, p] : belief.probs()) {
    const auto it = log_likelihoods.find(goal);
    if (it == log_likelihoods.end()) throw std::invalid_argument("no likelihood for goal '" + goal + "'");
    double ls = it->second + (p > 0.0 ? keep * std::log(p) : kNegInf);
    if (std::isnan(ls)) ls = kNegInf;
    log_score[goal] = ls;
    best = std::max(best, ls);
  }
  if (!std::isfinite(best)) {
    const IntentBelief& fallback = cfg.prior.size() ? cfg.prior : belief;
    return {fallback, true};
  }

  const double floor = best + std::log(cfg.prob_floor);
  std::map<std::string, double> probs;
  for (const auto& [goal, ls] : log_score) probs[goal] = std::exp(std::max(ls, floor) - best);
  return {IntentBelief(std::move(probs)), false};
}

UpdateResult update(const IntentBelief& belief, const Point2& prev, const Point2& curr,
                    const GpMixture& mixture, const IntentConfig& cfg) {
  std::map<std::string, double> loglik;
  for (const auto& [goal, p] : belief.probs()) loglik[goal] = mixture.log_transition_density(goal, prev, curr);
  return update_from_log_likelihoods(belief, loglik, cfg);
}

std::string map_goal(const IntentBelief& belief) {
  if (belief.size() == 0) throw std::invalid_argument("map_goal on an empty belief");
  // std::map iterates in id order, so strict > keeps the smallest id on ties.
  auto best = belief.probs().begin();
  for (auto it = belief.probs().begin(); it != belief.probs().end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

}  // namespace riskplan::intent
