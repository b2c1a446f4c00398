#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "riskplan/fallmodel.hpp"

using namespace riskplan;
using fall::FallParams;

TEST_CASE("unaided score endpoints and midpoint") {
  const auto room = fixtures::open_room({{5, 5}});
  const FallParams p;
  CHECK(fall::score_unaided({5, 5}, room, p) == 0.0);
  CHECK(fall::score_unaided({5, 7}, room, p) == 1.0);
  CHECK(fall::score_unaided({5, 9}, room, p) == 1.0);
  CHECK(fall::score_unaided({5, 6}, room, p) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("empty support list saturates at d_max") {
  CHECK(fall::score_unaided({2, 2}, fixtures::open_room(), FallParams{}) == 1.0);
}

TEST_CASE("aided score") {
  const FallParams p;
  CHECK(fall::aided_from_unaided(1.0, p) == doctest::Approx(0.3));
  CHECK(fall::aided_from_unaided(0.0, p) == 0.05);
  FallParams identity{2.0, 6.0, 1.0, 0.0};
  for (double u : {0.0, 0.2, 0.9}) CHECK(fall::aided_from_unaided(u, identity) == u);
  const auto room = fixtures::open_room({{5, 5}});
  CHECK(fall::score_aided({5, 9}, room, p) == doctest::Approx(0.3));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS((FallParams{0.0, 6.0, 0.3, 0.05}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((FallParams{2.0, 6.0, 0.3, 0.5}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((FallParams{2.0, 6.0, 1.5, 0.05}.validate()), std::invalid_argument);
  CHECK_NOTHROW(FallParams{}.validate());
}

TEST_CASE("score monotone in support distance and bounded") {
  const FallParams p;
  double prev = -1.0;
  for (int i = 0; i <= 300; ++i) {
    const double s = fall::unaided_from_distance(i * 0.01, p);
    CHECK(s >= prev);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    CHECK(fall::aided_from_unaided(s, p) <= 1.0);
    prev = s;
  }
}

TEST_CASE("aided never exceeds unaided where the floor is inactive") {
  const auto room = fixtures::open_room({{2, 2}, {8, 3}});
  const FallParams p;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const Point2 q{u(rng), u(rng)};
    const double un = fall::score_unaided(q, room, p);
    if (p.aided_floor <= p.aided_scale * un) CHECK(fall::score_aided(q, room, p) <= un);
  }
}

TEST_CASE("trajectory scores switch at the intervention index") {
  const auto room = fixtures::open_room({{0, 0}});
  const FallParams p;
  Trajectory traj;
  for (int i = 0; i < 6; ++i) traj.states.push_back({0.4 * i, 0.0});

  const auto all_aided = fall::trajectory_scores(traj, 0, room, p);
  const auto none = fall::trajectory_scores(traj, traj.size(), room, p);
  for (std::size_t t = 0; t < traj.size(); ++t) {
    CHECK(all_aided[t] == fall::score_aided(traj.states[t], room, p));
    CHECK(none[t] == fall::score_unaided(traj.states[t], room, p));
  }
  CHECK_THROWS_AS(fall::trajectory_scores(traj, traj.size() + 1, room, p), std::invalid_argument);

  // With the floor inactive everywhere, earlier intervention is pointwise no worse.
  const FallParams nofloor{2.0, 6.0, 0.3, 0.0};
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto early = fall::trajectory_scores(traj, i, room, nofloor);
    const auto late = fall::trajectory_scores(traj, i + 1, room, nofloor);
    for (std::size_t t = 0; t < traj.size(); ++t) CHECK(early[t] <= late[t]);
  }

  const FallParams identity{2.0, 6.0, 1.0, 0.0};
  CHECK(fall::trajectory_scores(traj, 2, room, identity) == fall::trajectory_scores(traj, 5, room, identity));
}

TEST_CASE("distance inverse used by fixtures") {
  const FallParams p;
  for (double s : {0.2, 0.5, 0.8}) {
    CHECK(fall::unaided_from_distance(fixtures::distance_for_score(s, p), p) == doctest::Approx(s).epsilon(1e-12));
  }
}
