#include "riskplan/risk.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

namespace riskplan::risk {

namespace {

void check_tail(double tail) {
  if (!(tail > 0.0 && tail <= 1.0)) {
    throw std::invalid_argument("tail level must lie in (0, 1], got " + std::to_string(tail));
  }
}

}  // namespace

EmpiricalDist::EmpiricalDist(std::vector<double> values, std::vector<double> weights)
    : values_(std::move(values)), weights_(std::move(weights)) {
  if (values_.empty()) throw std::invalid_argument("empirical distribution needs at least one value");
  if (values_.size() != weights_.size()) {
    throw std::invalid_argument("empirical distribution: values and weights differ in length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) throw std::invalid_argument("empirical distribution: non-finite value");
    if (!(weights_[i] >= 0.0)) throw std::invalid_argument("empirical distribution: negative weight");
    total += weights_[i];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("empirical distribution: weights sum to " + std::to_string(total));
  }
}

EmpiricalDist EmpiricalDist::uniform(std::vector<double> values) {
  const std::size_t n = values.size();
  std::vector<double> w(n, n ? 1.0 / static_cast<double>(n) : 0.0);
  return EmpiricalDist(std::move(values), std::move(w));
}

void RiskConfig::validate() const {
  check_tail(tail);
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
}

double expected(const EmpiricalDist& d) {
  double acc = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) acc += d.weights()[i] * d.values()[i];
  return acc;
}

double worst_case(const EmpiricalDist& d) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.weights()[i] > 0.0) best = std::max(best, d.values()[i]);
  }
  return best;
}

double value_at_risk(const EmpiricalDist& d, double tail) {
  check_tail(tail);
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return d.values()[a] > d.values()[b]; });

  // Walk from the largest value down; `above` is P[Z > current value].
  // Zero-weight atoms are never attained and are skipped as candidates.
  double above = 0.0;
  double answer = worst_case(d);
  std::size_t i = 0;
  while (i < order.size()) {
    const double z = d.values()[order[i]];
    if (above > tail + kTailSlack) break;
    double mass = 0.0;
    while (i < order.size() && d.values()[order[i]] == z) mass += d.weights()[order[i++]];
    if (mass > 0.0) answer = z;
    above += mass;
  }
  return answer;
}

double cvar(const EmpiricalDist& d, double tail) {
  check_tail(tail);
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return d.values()[a] > d.values()[b]; });

  double taken = 0.0;
  double acc = 0.0;
  for (std::size_t idx : order) {
    const double w = d.weights()[idx];
    const double share = std::min(w, tail - taken);
    if (share <= 0.0) break;
    acc += share * d.values()[idx];
    taken += share;
  }
  // Rounding in the weights can leave taken a hair below tail; renormalize by
  // what was actually accumulated.
  return taken > 0.0 ? acc / taken : d.values()[order.front()];
}

double combined(const EmpiricalDist& d, const RiskConfig& cfg) {
  const double e = expected(d);
  if (cfg.beta == 0.0) return e;
  return e + cfg.beta * cvar(d, cfg.tail);
}

double cvar_uniform(std::span<double> scratch, double tail) {
  const std::size_t n = scratch.size();
  const double w = 1.0 / static_cast<double>(n);
  const double atoms = tail * static_cast<double>(n);
  auto whole = static_cast<std::size_t>(std::floor(atoms + 1e-9));
  whole = std::min(whole, n);
  const double frac = (whole < n) ? std::max(0.0, atoms - static_cast<double>(whole)) : 0.0;
  const std::size_t needed = std::min(n, whole + (frac > 1e-12 ? 1 : 0));

  std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(needed),
                    scratch.end(), std::greater<>());
  double acc = 0.0;
  for (std::size_t i = 0; i < whole; ++i) acc += w * scratch[i];
  double taken = w * static_cast<double>(whole);
  if (needed > whole) {
    const double share = tail - taken;
    acc += share * scratch[whole];
    taken += share;
  }
  return acc / taken;
}

}  // namespace riskplan::risk
