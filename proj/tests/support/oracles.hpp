#pragma once

// Independent reference implementations used by unit and acceptance tests.
// They favour directness over speed and share no code with the library.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "riskplan/fallmodel.hpp"
#include "riskplan/gp.hpp"
#include "riskplan/planner.hpp"
#include "riskplan/predict.hpp"

namespace oracle {

/// Mean of the worst `tail` probability mass, walking atoms from the top.
inline double cvar_sorted_tail(const std::vector<double>& values, const std::vector<double>& weights, double tail) {
  std::vector<std::pair<double, double>> atoms;
  for (std::size_t i = 0; i < values.size(); ++i) atoms.emplace_back(values[i], weights[i]);
  std::sort(atoms.begin(), atoms.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  long double remaining = tail;
  long double total = 0.0L;
  for (const auto& [v, w] : atoms) {
    if (remaining <= 0.0L) break;
    const long double take = std::min<long double>(w, remaining);
    total += take * v;
    remaining -= take;
  }
  return static_cast<double>(total / (static_cast<long double>(tail) - std::max(remaining, 0.0L)));
}

/// Rockafellar-Uryasev form: min over thresholds z of z + E[(Z - z)+] / tail.
inline double cvar_ru(const std::vector<double>& values, const std::vector<double>& weights, double tail) {
  double best = INFINITY;
  for (double z : values) {
    long double excess = 0.0L;
    for (std::size_t i = 0; i < values.size(); ++i) excess += weights[i] * std::max(values[i] - z, 0.0);
    best = std::min(best, static_cast<double>(z + excess / tail));
  }
  return best;
}

/// Smallest attained value z with P[Z > z] <= tail, by checking every atom.
inline double var_enumerate(const std::vector<double>& values, const std::vector<double>& weights, double tail) {
  double best = INFINITY;
  for (std::size_t c = 0; c < values.size(); ++c) {
    if (weights[c] <= 0.0) continue;
    long double above = 0.0L;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] > values[c]) above += weights[i];
    }
    if (above <= tail + 1e-12) best = std::min(best, values[c]);
  }
  return best;
}

struct DenseGp {
  double mean;
  double variance;
  double log_evidence;
};

inline double se_kernel(const riskplan::Point2& a, const riskplan::Point2& b, const riskplan::gp::Hyperparams& h) {
  const double u = (a.x - b.x) / h.length_scales[0];
  const double v = (a.y - b.y) / h.length_scales[1];
  return h.signal_variance * std::exp(-0.5 * (u * u + v * v));
}

/// Explicit-inverse GP posterior and evidence. `jitter` is the extra diagonal
/// the model reports it added.
inline DenseGp dense_gp(const std::vector<riskplan::Point2>& x, const std::vector<double>& y,
                        const riskplan::gp::Hyperparams& h, double jitter, const riskplan::Point2& q) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd k(n, n);
  Eigen::VectorXd ks(n), yy(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    yy(i) = y[static_cast<std::size_t>(i)];
    ks(i) = se_kernel(x[static_cast<std::size_t>(i)], q, h);
    for (Eigen::Index j = 0; j < n; ++j) k(i, j) = se_kernel(x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)], h);
    k(i, i) += h.noise_variance + jitter;
  }
  const Eigen::MatrixXd kinv = k.inverse();
  const double logdet = std::log(k.determinant());
  DenseGp out;
  out.mean = ks.dot(kinv * yy);
  out.variance = h.signal_variance - ks.dot(kinv * ks);
  out.log_evidence = -0.5 * yy.dot(kinv * yy) - 0.5 * logdet -
                     0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  return out;
}

/// Direct evaluation of the patient log-optimality: every (goal, trajectory,
/// step) term enumerated, exponentials formed explicitly, no log-sum-exp.
inline double patient_log_optimality(const std::vector<riskplan::TrajectoryEnsemble>& ensembles,
                                     const riskplan::planner::InterventionCandidate& cand,
                                     const riskplan::fall::FallParams& fall, const riskplan::RoomLayout& layout,
                                     const riskplan::planner::PlannerConfig& cfg) {
  using riskplan::planner::Aggregation;
  using riskplan::planner::Method;
  long double mixed = 0.0L;
  for (const auto& e : ensembles) {
    const std::size_t steps = e.trajectories.front().size();
    std::vector<std::size_t> handover(e.trajectories.size(), steps);
    for (std::size_t k = 0; k < e.trajectories.size(); ++k) {
      for (std::size_t t = cand.time_index; t < steps; ++t) {
        const double dx = e.trajectories[k][t].x - cand.pose.x;
        const double dy = e.trajectories[k][t].y - cand.pose.y;
        if (std::sqrt(dx * dx + dy * dy) <= cfg.reach_eps) {
          handover[k] = t;
          break;
        }
      }
    }
    long double penalty_sum = 0.0L, exp_sum = 0.0L;
    for (std::size_t t = 0; t < steps; ++t) {
      std::vector<double> scores;
      for (std::size_t k = 0; k < e.trajectories.size(); ++k) {
        const double u = riskplan::fall::score_unaided(e.trajectories[k][t], layout, fall);
        scores.push_back(t < handover[k] ? u : std::max(fall.aided_floor, fall.aided_scale * u));
      }
      const std::vector<double> w(scores.size(), 1.0 / static_cast<double>(scores.size()));
      double mean = 0.0;
      for (double s : scores) mean += s / static_cast<double>(scores.size());
      const double tail_mean = cvar_sorted_tail(scores, w, cfg.risk.tail);
      double pen = 0.0;
      switch (cfg.method) {
        case Method::expected: pen = mean; break;
        case Method::cvar: pen = cfg.risk.beta * tail_mean; break;
        default: pen = mean + cfg.risk.beta * tail_mean; break;
      }
      penalty_sum += pen;
      exp_sum += std::exp(static_cast<long double>(-pen));
    }
    const long double value = cfg.aggregation == Aggregation::product ? std::exp(-penalty_sum) : exp_sum;
    mixed += e.weight * value;
  }
  return static_cast<double>(std::log(mixed));
}

/// Best objective over a regular grid of poses and every `time_stride`-th step.
inline std::pair<riskplan::planner::InterventionCandidate, double> grid_search(
    const riskplan::planner::ObjectiveEvaluator& eval, const riskplan::Rect& bounds, double spacing,
    std::size_t time_stride) {
  riskplan::planner::InterventionCandidate best;
  double best_value = -INFINITY;
  const auto nx = static_cast<int>(std::floor(bounds.width() / spacing + 1e-9));
  const auto ny = static_cast<int>(std::floor(bounds.height() / spacing + 1e-9));
  for (std::size_t t = 0; t <= eval.horizon(); t += time_stride) {
    for (int i = 0; i <= nx; ++i) {
      for (int j = 0; j <= ny; ++j) {
        const riskplan::planner::InterventionCandidate c{{bounds.xmin + i * spacing, bounds.ymin + j * spacing}, t};
        const double v = eval(c);
        if (v > best_value) {
          best_value = v;
          best = c;
        }
      }
    }
  }
  return {best, best_value};
}

}  // namespace oracle
