#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "riskplan/room.hpp"

namespace riskplan::gp {

/// Squared-exponential kernel parameters. The kernel uses a diagonal metric
/// built from per-dimension length scales: exp(-0.5 * sum(((a_i-b_i)/l_i)^2)).
struct Hyperparams {
  double signal_variance = 1.0;
  std::array<double, 2> length_scales{1.0, 1.0};
  double noise_variance = 0.01;

  void validate() const;
  std::string describe() const;
};

struct Gaussian1 {
  double mean = 0.0;
  double variance = 0.0;
};

class ModelFitError : public std::runtime_error {
 public:
  ModelFitError(const std::string& what, Hyperparams h) : std::runtime_error(what), hyper_(h) {}
  const Hyperparams& hyperparams() const { return hyper_; }

 private:
  Hyperparams hyper_;
};

double kernel(const Point2& a, const Point2& b, const Hyperparams& h);

/// Zero-mean GP regressor for one scalar output over 2D inputs. A
/// default-constructed model has no data and predicts the prior.
class Model {
 public:
  Model() = default;
  explicit Model(Hyperparams h);

  /// Conditions on data with fixed hyperparameters. Throws ModelFitError
  /// when the noisy kernel matrix cannot be factorized even after jitter.
  static Model condition(std::vector<Point2> inputs, std::vector<double> targets, Hyperparams h);

  bool trained() const { return !inputs_.empty(); }
  std::size_t size() const { return inputs_.size(); }
  const std::vector<Point2>& inputs() const { return inputs_; }
  const Eigen::VectorXd& targets() const { return targets_; }
  const Hyperparams& hyperparams() const { return hyper_; }
  /// Diagonal jitter that was added on top of the noise variance.
  double jitter() const { return jitter_; }

  Gaussian1 predict(const Point2& query) const;
  /// Density of a new noisy observation: latent posterior plus noise variance.
  Gaussian1 predict_observation(const Point2& query) const;
  double predict_mean(const Point2& query) const;
  double log_evidence() const;

 private:
  std::vector<Point2> inputs_;
  Eigen::VectorXd targets_;
  Hyperparams hyper_;
  Eigen::MatrixXd chol_;   // lower Cholesky factor of K + (noise + jitter) I
  Eigen::VectorXd alpha_;  // (K + (noise + jitter) I)^-1 y
  double jitter_ = 0.0;
  double half_log_det_ = 0.0;
};

struct FitConfig {
  double lower_bound = 1e-4;
  double upper_bound = 1e4;
  /// Extra Nelder-Mead starts besides the supplied initial point.
  int restarts = 2;
  int max_evaluations = 400;
  double tolerance = 1e-7;
};

/// Maximizes the log marginal likelihood over hyperparameters in log space,
/// starting from `init` and from data-driven restarts. The result is never
/// worse than `init`.
Model fit(std::vector<Point2> inputs, std::vector<double> targets, const Hyperparams& init,
          const FitConfig& cfg = {});

inline Gaussian1 predict(const Model& m, const Point2& q) { return m.predict(q); }
inline double log_evidence(const Model& m) { return m.log_evidence(); }

/// log N(x; g.mean, g.variance)
double log_density(const Gaussian1& g, double x);

}  // namespace riskplan::gp
