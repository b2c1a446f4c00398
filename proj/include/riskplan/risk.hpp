#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace riskplan::risk {

/// Weighted sample of scalar costs. Weights are nonnegative and sum to one.
class EmpiricalDist {
 public:
  EmpiricalDist(std::vector<double> values, std::vector<double> weights);

  /// Equal weights 1/n.
  static EmpiricalDist uniform(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  std::span<const double> weights() const { return weights_; }
  std::size_t size() const { return values_.size(); }

 private:
  std::vector<double> values_;
  std::vector<double> weights_;
};

struct RiskConfig {
  /// Fraction of worst (highest-cost) outcomes averaged by cvar.
  double tail = 0.1;
  /// Weight of the cvar term in combined().
  double beta = 1.0;

  void validate() const;
};

/// Slack used when comparing tail probabilities against the tail level.
inline constexpr double kTailSlack = 1e-12;

double expected(const EmpiricalDist& d);

/// Largest value among entries with positive weight.
double worst_case(const EmpiricalDist& d);

/// Smallest attained z with P[Z > z] <= tail.
double value_at_risk(const EmpiricalDist& d, double tail);

/// Mean of the worst `tail` fraction of the distribution. The atom that
/// straddles the tail boundary contributes fractionally, so cvar(d, 1) equals
/// expected(d).
double cvar(const EmpiricalDist& d, double tail);

/// expected(d) + beta * cvar(d, tail).
double combined(const EmpiricalDist& d, const RiskConfig& cfg);

/// Equal-weight cvar over raw samples. Reorders `scratch`; used on hot paths
/// where building an EmpiricalDist per call is wasteful.
double cvar_uniform(std::span<double> scratch, double tail);

}  // namespace riskplan::risk
