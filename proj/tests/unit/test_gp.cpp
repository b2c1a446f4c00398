#include <doctest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "riskplan/gp.hpp"

using namespace riskplan;
using gp::Hyperparams;

namespace {

struct RandomModel {
  std::vector<Point2> x;
  std::vector<double> y;
  Hyperparams h;
};

RandomModel random_model(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 5.0), lu(-1.5, 1.0);
  RandomModel m;
  m.h.signal_variance = std::exp(lu(rng));
  m.h.length_scales = {std::exp(lu(rng)), std::exp(lu(rng))};
  m.h.noise_variance = std::exp(lu(rng) - 3.0);
  for (std::size_t i = 0; i < n; ++i) {
    m.x.push_back({u(rng), u(rng)});
    m.y.push_back(std::sin(m.x.back().x) + 0.3 * m.x.back().y * u(rng) / 5.0);
  }
  return m;
}

/// Draw from a zero-mean GP with the given hyperparameters at random inputs.
RandomModel sample_gp(std::mt19937_64& rng, std::size_t n, const Hyperparams& h) {
  std::uniform_real_distribution<double> u(0.0, 5.0);
  std::normal_distribution<double> z(0.0, 1.0);
  RandomModel m;
  m.h = h;
  const auto nn = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd k(nn, nn);
  for (std::size_t i = 0; i < n; ++i) m.x.push_back({u(rng), u(rng)});
  for (Eigen::Index i = 0; i < nn; ++i) {
    for (Eigen::Index j = 0; j < nn; ++j) k(i, j) = oracle::se_kernel(m.x[size_t(i)], m.x[size_t(j)], h);
    k(i, i) += h.noise_variance;
  }
  const Eigen::MatrixXd l = k.llt().matrixL();
  Eigen::VectorXd w(nn);
  for (auto& v : w) v = z(rng);
  const Eigen::VectorXd f = l * w;
  m.y.assign(f.data(), f.data() + nn);
  return m;
}

}  // namespace

TEST_CASE("kernel") {
  Hyperparams h;
  CHECK(gp::kernel({1, 2}, {1, 2}, h) == 1.0);
  CHECK(gp::kernel({0, 0}, {2, 0}, h) == doctest::Approx(0.1353352832366127));
  CHECK(gp::kernel({0.3, 1}, {2, -1}, h) == gp::kernel({2, -1}, {0.3, 1}, h));
  h.signal_variance = 2.0;
  CHECK(gp::kernel({0, 0}, {0.5, 0.5}, h) <= 2.0);
}

TEST_CASE("untrained model predicts the prior") {
  Hyperparams h;
  h.signal_variance = 0.7;
  const gp::Model m(h);
  CHECK_FALSE(m.trained());
  const auto g = m.predict({3, 3});
  CHECK(g.mean == 0.0);
  CHECK(g.variance == 0.7);
}

TEST_CASE("single training pair closed form") {
  Hyperparams h;
  h.signal_variance = 1.5;
  h.noise_variance = 1e-6;
  const auto m = gp::Model::condition({{1, 1}}, {0.8}, h);
  CHECK(m.predict({1, 1}).mean == doctest::Approx(1.5 / (1.5 + 1e-6) * 0.8).epsilon(1e-12));
  CHECK(m.log_evidence() ==
        doctest::Approx(-0.5 * 0.64 / (1.5 + 1e-6) - 0.5 * std::log(1.5 + 1e-6) - 0.5 * std::log(2 * std::numbers::pi)));

  const auto zero = gp::Model::condition({{1, 1}}, {0.0}, h);
  CHECK(zero.log_evidence() == doctest::Approx(-0.5 * std::log(1.5 + 1e-6) - 0.5 * std::log(2 * std::numbers::pi)));
}

TEST_CASE("far from data reverts to the prior") {
  Hyperparams h;
  h.length_scales = {0.2, 0.2};
  const auto m = gp::Model::condition({{0, 0}, {0.1, 0}}, {1.0, 0.9}, h);
  const auto g = m.predict({50, 50});
  CHECK(g.mean == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(g.variance == doctest::Approx(1.0));
}

TEST_CASE("dense oracle agreement") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 6.0);
  for (int trial = 0; trial < 30; ++trial) {
    const auto r = random_model(rng, 2 + static_cast<std::size_t>(trial) % 40);
    const auto m = gp::Model::condition(r.x, r.y, r.h);
    for (int q = 0; q < 5; ++q) {
      const Point2 p{u(rng), u(rng)};
      const auto o = oracle::dense_gp(r.x, r.y, r.h, m.jitter(), p);
      const auto g = m.predict(p);
      CHECK(std::abs(g.mean - o.mean) <= 1e-8);
      CHECK(std::abs(g.variance - std::clamp(o.variance, 0.0, r.h.signal_variance)) <= 1e-8);
      CHECK(std::abs(m.log_evidence() - o.log_evidence) <= 1e-8);
      CHECK(g.variance <= r.h.signal_variance + 1e-9);
      CHECK(g.variance >= 0.0);
      CHECK(std::abs(m.predict_mean(p) - g.mean) <= 1e-12);
      CHECK(m.predict_observation(p).variance == doctest::Approx(g.variance + r.h.noise_variance));
    }
  }
}

TEST_CASE("duplicate training point barely moves the prediction") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    auto r = random_model(rng, 12);
    r.h.noise_variance = 1e-9;
    // Long length scales on few points make the interpolant itself move by more than the bound.
    r.h.length_scales = {std::min(r.h.length_scales[0], 1.0), std::min(r.h.length_scales[1], 1.0)};
    const auto m = gp::Model::condition(r.x, r.y, r.h);
    auto x2 = r.x;
    auto y2 = r.y;
    x2.push_back(r.x[3]);
    y2.push_back(r.y[3]);
    const auto m2 = gp::Model::condition(x2, y2, r.h);
    CHECK(std::abs(m.predict(r.x[3]).mean - m2.predict(r.x[3]).mean) < 1e-6);
  }
}

TEST_CASE("jitter rescues a singular kernel matrix") {
  Hyperparams h;
  h.noise_variance = 1e-300;
  const auto m = gp::Model::condition({{0, 0}, {0, 0}, {0, 0}}, {1, 1, 1}, h);
  CHECK(m.jitter() > 0.0);
  CHECK(m.predict({0, 0}).mean == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("invalid hyperparameters") {
  Hyperparams h;
  h.noise_variance = 0.0;
  CHECK_THROWS_AS(gp::Model{h}, std::invalid_argument);
  CHECK_THROWS_AS(gp::Model::condition({{0, 0}}, {1, 2}, Hyperparams{}), std::invalid_argument);
  CHECK_THROWS_AS(gp::fit({{0, 0}}, {1}, Hyperparams{}), std::invalid_argument);
}

TEST_CASE("fit never returns worse evidence than the initial guess") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const auto r = random_model(rng, 30);
    const double init_ev = gp::Model::condition(r.x, r.y, r.h).log_evidence();
    const auto m = gp::fit(r.x, r.y, r.h);
    CHECK(m.log_evidence() >= init_ev - 1e-7);

    // Local optimality in the noise direction.
    auto lower = m.hyperparams(), higher = m.hyperparams();
    lower.noise_variance /= 4.0;
    higher.noise_variance *= 4.0;
    if (m.hyperparams().noise_variance / 4.0 > 1e-4) {
      CHECK(gp::Model::condition(r.x, r.y, lower).log_evidence() < m.log_evidence());
    }
    CHECK(gp::Model::condition(r.x, r.y, higher).log_evidence() < m.log_evidence());
  }
}

TEST_CASE("all-zero targets drive the noise to its floor") {
  std::vector<Point2> x;
  for (int i = 0; i < 10; ++i) x.push_back({0.3 * i, 0.1 * i});
  const auto m = gp::fit(x, std::vector<double>(10, 0.0), Hyperparams{});
  CHECK(m.hyperparams().noise_variance < 1e-3);
  CHECK(m.predict({1, 1}).mean == 0.0);
}

TEST_CASE("hyperparameters of a known GP are recovered within a factor of two") {
  std::mt19937_64 rng(21);
  Hyperparams truth;
  truth.signal_variance = 1.0;
  truth.length_scales = {0.5, 0.5};
  truth.noise_variance = 0.01;
  const auto r = sample_gp(rng, 200, truth);
  const auto m = gp::fit(r.x, r.y, Hyperparams{});
  const auto& h = m.hyperparams();
  CHECK(h.length_scales[0] > 0.25);
  CHECK(h.length_scales[0] < 1.0);
  CHECK(h.length_scales[1] > 0.25);
  CHECK(h.length_scales[1] < 1.0);
  CHECK(h.noise_variance > 0.005);
  CHECK(h.noise_variance < 0.02);
  CHECK(h.signal_variance > 0.5);
  CHECK(h.signal_variance < 2.0);
}

TEST_CASE("log density") {
  CHECK(gp::log_density({0, 1}, 0) == doctest::Approx(-0.5 * std::log(2 * std::numbers::pi)));
  CHECK(std::isfinite(gp::log_density({0, 0}, 1.0)));
}
