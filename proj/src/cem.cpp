#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "riskplan/planner.hpp"
#include "riskplan/rng.hpp"

namespace riskplan::planner {

std::size_t elite_count(double gamma, std::size_t n) {
  const double raw = gamma * static_cast<double>(n);
  auto e = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
  return std::clamp<std::size_t>(e, 1, n);
}

double kl_diagonal(const std::array<double, 3>& mean_p, const std::array<double, 3>& std_p,
                   const std::array<double, 3>& mean_q, const std::array<double, 3>& std_q) {
  double kl = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double vp = std_p[i] * std_p[i];
    const double vq = std_q[i] * std_q[i];
    const double dm = mean_p[i] - mean_q[i];
    kl += 0.5 * (vp / vq + dm * dm / vq - 1.0 + std::log(vq / vp));
  }
  return kl;
}

CemResult cem_optimize(const std::function<double(const InterventionCandidate&)>& f, const CemSpace& space,
                       const CemConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const Rect& b = space.bounds;
  const double tmax = static_cast<double>(space.max_time);
  std::array<double, 3> mean = cfg.init_mean.value_or(std::array<double, 3>{b.center().x, b.center().y, 0.5 * tmax});
  std::array<double, 3> stddev =
      cfg.init_std.value_or(std::array<double, 3>{0.5 * b.width(), 0.5 * b.height(), std::max(0.5 * tmax, 1.0)});
  for (std::size_t i = 0; i < 3; ++i) stddev[i] = std::max(stddev[i], cfg.min_std[i]);

  CemResult out;
  out.elites_per_iteration = elite_count(cfg.elite_fraction, cfg.n_samples);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  struct Sample {
    std::array<double, 3> v;
    double value;
  };
  std::vector<Sample> samples(cfg.n_samples);
  std::vector<std::size_t> order(cfg.n_samples);

  for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
    std::size_t feasible = 0;
    std::array<double, 3> sampling_std = stddev;
    for (std::size_t escalation = 0;; ++escalation) {
      feasible = 0;
      for (std::size_t i = 0; i < samples.size(); ++i) {
        auto& s = samples[i];
        if (iter == 0 && escalation == 0 && i < cfg.initial_samples.size()) {
          const auto& c = cfg.initial_samples[i];
          s.v = {std::clamp(c.pose.x, b.xmin, b.xmax), std::clamp(c.pose.y, b.ymin, b.ymax),
                 std::min(static_cast<double>(c.time_index), tmax)};
        } else {
          s.v = {std::clamp(mean[0] + sampling_std[0] * normal(rng), b.xmin, b.xmax),
                 std::clamp(mean[1] + sampling_std[1] * normal(rng), b.ymin, b.ymax),
                 std::clamp(std::round(mean[2] + sampling_std[2] * normal(rng)), 0.0, tmax)};
        }
        const double x = s.v[0], y = s.v[1], t = s.v[2];
        s.value = f({{x, y}, static_cast<std::size_t>(t)});
        if (std::isfinite(s.value)) {
          ++feasible;
          if (s.value > out.best_value) {
            out.best_value = s.value;
            out.best = {{x, y}, static_cast<std::size_t>(t)};
            out.feasible = true;
          }
        }
      }
      if (feasible > 0 || escalation >= cfg.max_escalations) break;
      for (double& sd : sampling_std) sd *= 2.0;
    }
    out.iterations = iter + 1;
    if (feasible == 0) break;

    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) {
      const bool fa = std::isfinite(samples[a].value), fc = std::isfinite(samples[c].value);
      if (fa != fc) return fa;
      return fa && samples[a].value > samples[c].value;
    });
    const std::size_t n_elite = std::min(out.elites_per_iteration, feasible);

    std::array<double, 3> new_mean{}, new_std{};
    for (std::size_t e = 0; e < n_elite; ++e) {
      for (std::size_t i = 0; i < 3; ++i) new_mean[i] += samples[order[e]].v[i] / static_cast<double>(n_elite);
    }
    for (std::size_t e = 0; e < n_elite; ++e) {
      for (std::size_t i = 0; i < 3; ++i) {
        const double d = samples[order[e]].v[i] - new_mean[i];
        new_std[i] += d * d / static_cast<double>(n_elite);
      }
    }
    for (std::size_t i = 0; i < 3; ++i) new_std[i] = std::max(std::sqrt(new_std[i]), cfg.min_std[i]);

    const double kl = kl_diagonal(new_mean, new_std, mean, sampling_std);
    out.kl_trace.push_back(kl);
    mean = new_mean;
    stddev = new_std;
    if (kl <= cfg.kl_tolerance) break;
  }
  out.mean = mean;
  out.stddev = stddev;
  return out;
}

}  // namespace riskplan::planner
