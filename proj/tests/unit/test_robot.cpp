#include "support.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "encounter/robot.hpp"

using namespace encounter;

namespace {

UserState user_at(Vec2 p, double t, bool tracked = true, double heading = 0.0) {
  return UserState{{p, heading}, tracked, t};
}

const UserState kFarUser = user_at({100.0, 100.0}, 0.0);

}  // namespace

TEST_CASE("speed cap follows the distance profile") {
  CHECK(speed_cap(2.0) == 1.1);
  CHECK(speed_cap(1.0) == 1.1);
  CHECK(speed_cap(0.5) == 0.5);
  CHECK(speed_cap(0.8) == 0.5);
  CHECK(speed_cap(0.9) == doctest::Approx(0.8));
  for (double d = 0.0; d < 3.0; d += 0.01) {
    CHECK(speed_cap(d) >= 0.5);
    CHECK(speed_cap(d) <= 1.1);
    CHECK(speed_cap(d + 0.01) >= speed_cap(d));
  }
}

TEST_CASE("status names round trip") {
  for (auto s : {RobotStatus::active, RobotStatus::halted_tracking_loss, RobotStatus::halted_estop,
                 RobotStatus::halted_rail_limit}) {
    CHECK(robot_status_from_string(to_string(s)) == s);
  }
  CHECK_THROWS_AS(robot_status_from_string("parked"), std::invalid_argument);
}

TEST_CASE("2 m travel time agrees with the profile integral") {
  // Cruise 2 -> 1 m at 1.1, ramp 1 -> 0.8 m where v = 0.5 + 3 (d - 0.8),
  // then 0.8 m at 0.5. Acceleration transients are small next to this.
  const double expected = 1.0 / 1.1 + std::log(1.1 / 0.5) / 3.0 + 0.8 / 0.5;
  CHECK(expected == doctest::Approx(2.772).epsilon(1e-3));

  const SimConfig config;
  const Arena arena;
  RobotState r{{1.0, 2.0}, {}};
  const ProxyState target{{3.0, 2.0}, {}};
  double t = 0.0;
  int steps = 0;
  double top = 0.0;
  while (distance(r.position, target.position) > 1e-3 && steps < 2000) {
    t += config.dt;
    r = step_robot(r, target, user_at({0.3, 0.3}, t), arena, config);
    top = std::max(top, r.velocity.norm());
    ++steps;
  }
  const double elapsed = steps * config.dt;
  CAPTURE(elapsed);
  CHECK(std::abs(elapsed - expected) / expected < 0.10);
  CHECK(top <= 1.1 + 1e-12);
  CHECK(r.status == RobotStatus::active);
}

TEST_CASE("acceleration is limited except when the cap bites") {
  const SimConfig config;
  RobotState r{{0.5, 0.5}, {}};
  const ProxyState target{{3.5, 3.5}, {}};
  for (int k = 1; k < 200; ++k) {
    const RobotState next = step_robot(r, target, kFarUser, Arena{}, config);
    const double dv = (next.velocity - r.velocity).norm();
    const double cap = speed_cap(distance(r.position, target.position));
    if (next.velocity.norm() < cap - 1e-9) CHECK(dv <= config.robot_max_accel * config.dt + 1e-9);
    CHECK(next.velocity.norm() <= cap + 1e-12);
    r = next;
  }
}

TEST_CASE("robot at rest on the proxy stays put") {
  const SimConfig config;
  const RobotState r{{2.0, 2.0}, {}};
  const RobotState next = step_robot(r, {{2.0, 2.0}, {}}, kFarUser, Arena{}, config);
  CHECK(next.position == r.position);
  CHECK(next.velocity == Vec2{});
  CHECK(next.status == RobotStatus::active);
}

TEST_CASE("tracking loss halts after 0.5 s") {
  const SimConfig config;
  RobotState r{{1.0, 1.0}, {}};
  const ProxyState target{{3.0, 3.0}, {}};
  double t = 0.0;
  for (int k = 0; k < 30; ++k) {
    t += config.dt;
    r = step_robot(r, target, user_at({0.3, 3.5}, t), Arena{}, config);
  }
  const double lost_at = t;
  std::optional<double> halted_at;
  for (int k = 0; k < 45; ++k) {  // 0.6 s
    t += config.dt;
    r = step_robot(r, target, user_at({0.3, 3.5}, t, false), Arena{}, config);
    if (!halted_at && r.status == RobotStatus::halted_tracking_loss) halted_at = t;
    if (halted_at) CHECK(r.velocity == Vec2{});
  }
  REQUIRE(halted_at);
  CHECK(*halted_at - lost_at <= 0.5 + config.dt + 1e-9);
  CHECK(*halted_at - lost_at > 0.5 - config.dt);

  // Tracking comes back: the halt clears on its own.
  t += config.dt;
  r = step_robot(r, target, user_at({0.3, 3.5}, t), Arena{}, config);
  CHECK(r.status == RobotStatus::active);
}

TEST_CASE("e-stop latches until released") {
  const SimConfig config;
  RobotState r{{1.0, 1.0}, {0.4, 0.0}};
  r = latch_estop(r);
  CHECK(r.status == RobotStatus::halted_estop);
  CHECK(r.velocity == Vec2{});
  for (int k = 0; k < 100; ++k) {
    r = step_robot(r, {{3.0, 3.0}, {}}, user_at({0.3, 3.5}, k * config.dt), Arena{}, config);
    CHECK(r.status == RobotStatus::halted_estop);
    CHECK(r.position == Vec2{1.0, 1.0});
  }
  r = release_estop(r);
  CHECK(r.status == RobotStatus::active);
  CHECK_FALSE(r.estop_latched);

  // Released while the user is untracked: still halted, for the other reason.
  RobotState lost = latch_estop(RobotState{{1.0, 1.0}, {}});
  lost = step_robot(lost, {{3.0, 3.0}, {}}, user_at({0.3, 3.5}, 1.0, false), Arena{}, config);
  lost = release_estop(lost);
  CHECK(lost.status == RobotStatus::halted_tracking_loss);
}

TEST_CASE("robot stays out of the keep-out zone") {
  const SimConfig config;
  const Arena arena;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int reached = 0;
  for (int i = 0; i < 100; ++i) {
    // User in the middle, robot and proxy on opposite sides of them.
    const Vec2 c{1.6 + 0.8 * unit(rng), 1.6 + 0.8 * unit(rng)};
    const ObstacleState o{c, 0.45, 0.30};
    const double a = 2.0 * std::numbers::pi * unit(rng);
    const double zone = o.radius + o.influence_band;
    RobotState r{clamp_to_arena(c + direction(a) * (zone + 0.05 + 0.3 * unit(rng)), arena), {}};
    if (distance(r.position, c) < zone + 1e-6) continue;
    const ProxyState p{clamp_to_arena(c + direction(a + 3.0) * (zone + 0.1), arena), {}};
    const std::vector<ObstacleState> keep{o};
    double closest = 1e9;
    for (int k = 0; k < 75 * 15; ++k) {
      r = step_robot(r, p, user_at(c, k * config.dt, true, a), arena, config, keep);
      closest = std::min(closest, distance(r.position, c));
    }
    CAPTURE(i);
    CHECK(closest >= zone - 1e-9);
    if (distance(r.position, p.position) < 0.02) ++reached;
  }
  // The goal is reachable around the zone in nearly every layout.
  CHECK(reached >= 90);
}

TEST_CASE("robot backs out of a zone that moved onto it") {
  const SimConfig config;
  const ObstacleState o{{2.0, 2.0}, 0.45, 0.30};
  RobotState r{{2.3, 2.0}, {}};
  const std::vector<ObstacleState> keep{o};
  double prev = distance(r.position, o.center);
  for (int k = 0; k < 200 && prev < 0.75; ++k) {
    r = step_robot(r, {{2.2, 2.0}, {}}, user_at({2.0, 2.0}, k * config.dt, true, 0.0), Arena{}, config, keep);
    const double d = distance(r.position, o.center);
    CHECK(d > prev);
    CHECK(r.velocity.norm() <= 1.1 + 1e-12);
    prev = d;
  }
  CHECK(prev >= 0.75 - 1e-9);
}

TEST_CASE("rail limit halts without latching") {
  const SimConfig config;
  const Arena arena;
  // Backing out of the zone drives the column into the rail.
  const std::vector<ObstacleState> keep{{{0.3, 2.0}, 0.45, 0.30}};
  RobotState r{{0.025, 2.0}, {}};
  r = step_robot(r, {{0.5, 2.0}, {}}, user_at({0.3, 2.0}, 0.0, true, 0.0), arena, config, keep);
  CHECK(r.status == RobotStatus::halted_rail_limit);
  CHECK(r.velocity == Vec2{});
  CHECK(arena.within_margins(r.position, 1e-12));
  // Zone gone: the next step is active again.
  r = step_robot(r, {{1.0, 2.0}, {}}, kFarUser, arena, config);
  CHECK(r.status == RobotStatus::active);
}
