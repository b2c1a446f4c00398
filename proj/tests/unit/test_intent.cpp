#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "riskplan/intent.hpp"
#include "riskplan/patientgen.hpp"
#include "riskplan/rng.hpp"

using namespace riskplan;
using intent::IntentBelief;
using intent::IntentConfig;

namespace {

IntentConfig no_forgetting() {
  IntentConfig cfg;
  cfg.forgetting = 0.0;
  return cfg;
}

double total(const IntentBelief& b) {
  double s = 0.0;
  for (const auto& [g, p] : b.probs()) s += p;
  return s;
}

}  // namespace

TEST_CASE("belief construction") {
  const IntentBelief b({{"a", 2.0}, {"b", 6.0}});
  CHECK(b["a"] == 0.25);
  CHECK(b["b"] == 0.75);
  CHECK(b.goals() == std::vector<std::string>{"a", "b"});
  CHECK_THROWS_AS(IntentBelief({{"a", -1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(IntentBelief({{"a", 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(IntentBelief(std::map<std::string, double>{}), std::invalid_argument);
  CHECK_THROWS_AS(b["zz"], std::out_of_range);
  CHECK(IntentBelief::uniform({"x", "y", "z"})["y"] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("config validation") {
  IntentConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.forgetting = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.forgetting = 0.0;
  cfg.prob_floor = 0.01;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.prob_floor = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("Bayes update examples") {
  const auto uniform = IntentBelief::uniform({"a", "b"});
  const auto equal = intent::update_from_log_likelihoods(uniform, {{"a", -1.3}, {"b", -1.3}}, no_forgetting());
  CHECK(equal.belief["a"] == doctest::Approx(0.5));

  const auto hand = intent::update_from_log_likelihoods(uniform, {{"a", std::log(0.3)}, {"b", std::log(0.1)}},
                                                        no_forgetting());
  CHECK(hand.belief["a"] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(hand.belief["b"] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK_FALSE(hand.fell_back_to_prior);

  // Strong forgetting: the previous belief hardly matters.
  IntentConfig forget;
  forget.forgetting = 0.999999;
  const IntentBelief skewed({{"a", 0.99}, {"b", 0.01}});
  const auto r = intent::update_from_log_likelihoods(skewed, {{"a", std::log(0.1)}, {"b", std::log(0.3)}}, forget);
  CHECK(r.belief["b"] == doctest::Approx(0.75).epsilon(1e-4));
}

TEST_CASE("underflowing likelihoods are handled in log space") {
  const auto uniform = IntentBelief::uniform({"a", "b"});
  const auto r = intent::update_from_log_likelihoods(uniform, {{"a", -2000.0}, {"b", -2001.0}}, no_forgetting());
  CHECK(r.belief["a"] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
}

TEST_CASE("degenerate likelihoods fall back to the prior") {
  IntentConfig cfg = no_forgetting();
  cfg.prior = IntentBelief({{"a", 0.2}, {"b", 0.8}});
  const auto uniform = IntentBelief::uniform({"a", "b"});
  const double ninf = -std::numeric_limits<double>::infinity();
  const auto r = intent::update_from_log_likelihoods(uniform, {{"a", ninf}, {"b", ninf}}, cfg);
  CHECK(r.fell_back_to_prior);
  CHECK(r.belief["b"] == 0.8);
  CHECK_THROWS_AS(intent::update_from_log_likelihoods(uniform, {{"a", 0.0}}, cfg), std::invalid_argument);
}

TEST_CASE("probability floor keeps goals recoverable") {
  const auto uniform = IntentBelief::uniform({"a", "b"});
  const auto r = intent::update_from_log_likelihoods(uniform, {{"a", 0.0}, {"b", -500.0}}, no_forgetting());
  CHECK(r.belief["b"] > 0.0);
  CHECK(r.belief["b"] == doctest::Approx(1e-6 / (1.0 + 1e-6)));
}

TEST_CASE("map goal") {
  CHECK(intent::map_goal(IntentBelief({{"a", 0.9}, {"b", 0.1}})) == "a");
  CHECK(intent::map_goal(IntentBelief({{"b", 0.5}, {"a", 0.5}})) == "a");
  CHECK(intent::map_goal(IntentBelief({{"a", 0.2}, {"b", 0.3}, {"c", 0.3}})) == "b");
}

TEST_CASE("random updates stay normalized") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ll(-60.0, 5.0), lam(0.0, 0.99);
  auto b = IntentBelief::uniform({"a", "b", "c", "d"});
  for (int i = 0; i < 2000; ++i) {
    IntentConfig cfg;
    cfg.forgetting = lam(rng);
    b = intent::update_from_log_likelihoods(b, {{"a", ll(rng)}, {"b", ll(rng)}, {"c", ll(rng)}, {"d", ll(rng)}}, cfg)
            .belief;
    CHECK(std::abs(total(b) - 1.0) <= 1e-12);
    for (const auto& [g, p] : b.probs()) CHECK_FALSE(std::isnan(p));
  }
}

TEST_CASE("repeated likelihood ratio drives the favoured goal to one") {
  auto b = IntentBelief::uniform({"a", "b", "c"});
  double prev = b["b"];
  for (int i = 0; i < 40; ++i) {
    b = intent::update_from_log_likelihoods(b, {{"a", 0.0}, {"b", std::log(1.5)}, {"c", 0.0}}, no_forgetting()).belief;
    CHECK(b["b"] >= prev);
    prev = b["b"];
  }
  CHECK(prev > 0.999);
}

TEST_CASE("map goal invariant under likelihood scaling") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> ll(-10.0, 0.0), shift(-50.0, 50.0);
  const IntentBelief b({{"a", 0.3}, {"b", 0.5}, {"c", 0.2}});
  for (int i = 0; i < 200; ++i) {
    std::map<std::string, double> l{{"a", ll(rng)}, {"b", ll(rng)}, {"c", ll(rng)}};
    auto shifted = l;
    const double c = shift(rng);
    for (auto& [g, v] : shifted) v += c;
    CHECK(intent::map_goal(intent::update_from_log_likelihoods(b, l, IntentConfig{}).belief) ==
          intent::map_goal(intent::update_from_log_likelihoods(b, shifted, IntentConfig{}).belief));
  }
}

TEST_CASE("belief converges along a generated trajectory") {
  const auto& ctx = fixtures::default_context();
  const auto& cfg = ctx.config;
  for (const auto& goal : cfg.layout.goal_ids()) {
    const auto traj = patientgen::generate(cfg.layout.initial_pose("bed_right"), goal, cfg.layout, cfg.patientgen,
                                           derive_seed(99, {fnv1a(goal)}));
    auto b = cfg.intent.prior;
    const std::size_t steps = std::min<std::size_t>(30, traj.size() - 1);
    for (std::size_t t = 1; t <= steps; ++t) {
      b = intent::update(b, traj.states[t - 1], traj.states[t], ctx.mixture, cfg.intent).belief;
    }
    CHECK(intent::map_goal(b) == goal);
  }
}
