#include "riskplan/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace riskplan::gp {

void Hyperparams::validate() const {
  const bool ok = signal_variance > 0.0 && length_scales[0] > 0.0 && length_scales[1] > 0.0 &&
                  noise_variance > 0.0 && std::isfinite(signal_variance) &&
                  std::isfinite(length_scales[0]) && std::isfinite(length_scales[1]) &&
                  std::isfinite(noise_variance);
  if (!ok) throw std::invalid_argument("invalid GP hyperparameters: " + describe());
}

std::string Hyperparams::describe() const {
  std::ostringstream os;
  os << "signal_variance=" << signal_variance << " length_scales=(" << length_scales[0] << ", "
     << length_scales[1] << ") noise_variance=" << noise_variance;
  return os.str();
}

double kernel(const Point2& a, const Point2& b, const Hyperparams& h) {
  const double dx = (a.x - b.x) / h.length_scales[0];
  const double dy = (a.y - b.y) / h.length_scales[1];
  return h.signal_variance * std::exp(-0.5 * (dx * dx + dy * dy));
}

Model::Model(Hyperparams h) : hyper_(h) { hyper_.validate(); }

Model Model::condition(std::vector<Point2> inputs, std::vector<double> targets, Hyperparams h) {
  h.validate();
  if (inputs.size() != targets.size()) {
    throw std::invalid_argument("GP training inputs and targets differ in length");
  }
  Model m(h);
  const auto n = static_cast<Eigen::Index>(inputs.size());
  if (n == 0) return m;

  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      k(i, j) = kernel(inputs[static_cast<std::size_t>(i)], inputs[static_cast<std::size_t>(j)], h);
      k(j, i) = k(i, j);
    }
  }
  k.diagonal().array() += h.noise_variance;
  const double mean_diag = k.diagonal().mean();

  // First try the plain matrix, then escalate jitter 1e-8 .. 1e-2 of the mean diagonal.
  double jitter = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  for (double rel = 1e-8; llt.info() != Eigen::Success; rel *= 10.0) {
    if (rel > 1e-2 * (1.0 + 1e-9)) {
      throw ModelFitError("GP kernel matrix is not positive definite after jitter escalation (" +
                              h.describe() + ")",
                          h);
    }
    const double next = rel * mean_diag;
    k.diagonal().array() += next - jitter;
    jitter = next;
    llt.compute(k);
  }

  m.inputs_ = std::move(inputs);
  m.targets_ = Eigen::Map<const Eigen::VectorXd>(targets.data(), n);
  m.chol_ = llt.matrixL();
  m.alpha_ = llt.solve(m.targets_);
  m.jitter_ = jitter;
  m.half_log_det_ = m.chol_.diagonal().array().log().sum();
  return m;
}

Gaussian1 Model::predict(const Point2& query) const {
  const double prior = hyper_.signal_variance;
  if (!trained()) return {0.0, prior};
  const auto n = static_cast<Eigen::Index>(inputs_.size());
  Eigen::VectorXd ks(n);
  for (Eigen::Index i = 0; i < n; ++i) ks(i) = kernel(inputs_[static_cast<std::size_t>(i)], query, hyper_);
  const double mean = ks.dot(alpha_);
  chol_.triangularView<Eigen::Lower>().solveInPlace(ks);
  const double var = std::clamp(prior - ks.squaredNorm(), 0.0, prior);
  return {mean, var};
}

Gaussian1 Model::predict_observation(const Point2& query) const {
  auto g = predict(query);
  g.variance += hyper_.noise_variance;
  return g;
}

double Model::predict_mean(const Point2& query) const {
  if (!trained()) return 0.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < inputs_.size(); ++i) {
    mean += kernel(inputs_[i], query, hyper_) * alpha_(static_cast<Eigen::Index>(i));
  }
  return mean;
}

double Model::log_evidence() const {
  if (!trained()) return 0.0;
  const double n = static_cast<double>(inputs_.size());
  return -0.5 * targets_.dot(alpha_) - half_log_det_ - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

double log_density(const Gaussian1& g, double x) {
  const double var = std::max(g.variance, std::numeric_limits<double>::min());
  const double r = x - g.mean;
  return -0.5 * (r * r / var + std::log(2.0 * std::numbers::pi * var));
}

namespace {

using Vec4 = std::array<double, 4>;

Hyperparams from_log(const Vec4& v) {
  Hyperparams h;
  h.signal_variance = std::exp(v[0]);
  h.length_scales = {std::exp(v[1]), std::exp(v[2])};
  h.noise_variance = std::exp(v[3]);
  return h;
}

Vec4 to_log(const Hyperparams& h) {
  return {std::log(h.signal_variance), std::log(h.length_scales[0]), std::log(h.length_scales[1]),
          std::log(h.noise_variance)};
}

/// Plain Nelder-Mead minimizer over a box in log space.
template <typename F>
std::pair<Vec4, double> nelder_mead(F&& f, Vec4 start, double lo, double hi, int max_evals,
                                    double tol) {
  auto clampv = [&](Vec4 v) {
    for (double& c : v) c = std::clamp(c, lo, hi);
    return v;
  };
  constexpr int kDim = 4;
  std::array<Vec4, kDim + 1> simplex;
  std::array<double, kDim + 1> val;
  simplex[0] = clampv(start);
  for (int i = 0; i < kDim; ++i) {
    Vec4 v = simplex[0];
    v[static_cast<std::size_t>(i)] += (v[static_cast<std::size_t>(i)] + 0.5 > hi) ? -0.5 : 0.5;
    simplex[static_cast<std::size_t>(i) + 1] = clampv(v);
  }
  int evals = 0;
  for (std::size_t i = 0; i <= kDim; ++i) {
    val[i] = f(simplex[i]);
    ++evals;
  }

  std::array<std::size_t, kDim + 1> idx;
  while (evals < max_evals) {
    for (std::size_t i = 0; i <= kDim; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
    const std::size_t best = idx[0], worst = idx[kDim], second = idx[kDim - 1];
    if (std::isfinite(val[worst]) && std::abs(val[worst] - val[best]) <= tol * (1.0 + std::abs(val[best]))) {
      break;
    }

    Vec4 centroid{};
    for (std::size_t i = 0; i < kDim; ++i) {
      for (std::size_t c = 0; c < kDim; ++c) centroid[c] += simplex[idx[i]][c] / kDim;
    }
    auto along = [&](double t) {
      Vec4 v;
      for (std::size_t c = 0; c < kDim; ++c) v[c] = centroid[c] + t * (simplex[worst][c] - centroid[c]);
      return clampv(v);
    };

    const Vec4 refl = along(-1.0);
    const double f_refl = f(refl);
    ++evals;
    if (f_refl < val[best]) {
      const Vec4 expd = along(-2.0);
      const double f_exp = f(expd);
      ++evals;
      if (f_exp < f_refl) {
        simplex[worst] = expd;
        val[worst] = f_exp;
      } else {
        simplex[worst] = refl;
        val[worst] = f_refl;
      }
      continue;
    }
    if (f_refl < val[second]) {
      simplex[worst] = refl;
      val[worst] = f_refl;
      continue;
    }
    const bool outside = f_refl < val[worst];
    const Vec4 contr = along(outside ? -0.5 : 0.5);
    const double f_con = f(contr);
    ++evals;
    if (f_con < (outside ? f_refl : val[worst])) {
      simplex[worst] = contr;
      val[worst] = f_con;
      continue;
    }
    for (std::size_t i = 1; i <= kDim; ++i) {
      auto& v = simplex[idx[i]];
      for (std::size_t c = 0; c < kDim; ++c) v[c] = simplex[best][c] + 0.5 * (v[c] - simplex[best][c]);
      val[idx[i]] = f(v);
      ++evals;
    }
  }
  const auto it = std::min_element(val.begin(), val.end());
  return {simplex[static_cast<std::size_t>(it - val.begin())], *it};
}

}  // namespace

Model fit(std::vector<Point2> inputs, std::vector<double> targets, const Hyperparams& init,
          const FitConfig& cfg) {
  init.validate();
  if (inputs.size() < 2) throw std::invalid_argument("GP fit needs at least two training pairs");
  if (inputs.size() != targets.size()) {
    throw std::invalid_argument("GP training inputs and targets differ in length");
  }
  const double lo = std::log(cfg.lower_bound);
  const double hi = std::log(cfg.upper_bound);

  auto neg_evidence = [&](const Vec4& v) {
    try {
      return -Model::condition(inputs, targets, from_log(v)).log_evidence();
    } catch (const ModelFitError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  std::vector<Vec4> starts{to_log(init)};
  if (cfg.restarts > 0) {
    const double n = static_cast<double>(targets.size());
    double mean = 0.0;
    for (double t : targets) mean += t / n;
    double var = 0.0;
    for (double t : targets) var += (t - mean) * (t - mean) / n;
    var = std::max(var + mean * mean, cfg.lower_bound * 10.0);
    double mx = 0.0, my = 0.0;
    for (const auto& p : inputs) {
      mx += p.x / n;
      my += p.y / n;
    }
    double sx = 0.0, sy = 0.0;
    for (const auto& p : inputs) {
      sx += (p.x - mx) * (p.x - mx) / n;
      sy += (p.y - my) * (p.y - my) / n;
    }
    Hyperparams data_driven;
    data_driven.signal_variance = var;
    data_driven.length_scales = {std::max(std::sqrt(sx), 1e-2), std::max(std::sqrt(sy), 1e-2)};
    data_driven.noise_variance = std::max(0.1 * var, cfg.lower_bound);
    starts.push_back(to_log(data_driven));
    for (int r = 1; r < cfg.restarts; ++r) {
      Hyperparams shorter = data_driven;
      const double shrink = std::pow(0.3, r);
      shorter.length_scales = {data_driven.length_scales[0] * shrink, data_driven.length_scales[1] * shrink};
      shorter.noise_variance = std::max(0.01 * var, cfg.lower_bound);
      starts.push_back(to_log(shorter));
    }
  }

  Vec4 best = starts.front();
  double best_val = neg_evidence(best);
  for (const auto& s : starts) {
    auto [v, f] = nelder_mead(neg_evidence, s, lo, hi, cfg.max_evaluations, cfg.tolerance);
    if (f < best_val) {
      best_val = f;
      best = v;
    }
  }
  if (!std::isfinite(best_val)) {
    throw ModelFitError("GP evidence optimization found no factorizable hyperparameters", init);
  }
  return Model::condition(std::move(inputs), std::move(targets), from_log(best));
}

}  // namespace riskplan::gp
