#include "support.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "encounter/geometry.hpp"
#include "encounter/proxy.hpp"

using namespace encounter;
using std::numbers::pi;

TEST_CASE("normalize_angle wraps into (-pi, pi]") {
  CHECK(normalize_angle(0.0) == 0.0);
  CHECK(normalize_angle(3.0 * pi) == doctest::Approx(pi).epsilon(1e-12));
  CHECK(normalize_angle(-1.5 * pi) == doctest::Approx(0.5 * pi).epsilon(1e-12));
  CHECK(normalize_angle(pi) == doctest::Approx(pi));
  CHECK(normalize_angle(-pi) == doctest::Approx(pi));
  for (double a = -20.0; a < 20.0; a += 0.37) {
    const double w = normalize_angle(a);
    CHECK(w > -pi);
    CHECK(w <= pi);
    CHECK(std::cos(w) == doctest::Approx(std::cos(a)).epsilon(1e-9));
    CHECK(std::sin(w) == doctest::Approx(std::sin(a)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(normalize_angle(std::nan("")), std::invalid_argument);
  CHECK_THROWS_AS(normalize_angle(INFINITY), std::invalid_argument);
}

TEST_CASE("clamp_to_arena respects the safety margin") {
  const Arena a;
  CHECK(clamp_to_arena({2.0, 2.0}, a) == Vec2{2.0, 2.0});
  const Vec2 left = clamp_to_arena({-1.0, 2.0}, a);
  CHECK(left.x == doctest::Approx(0.02));
  CHECK(left.y == 2.0);
  const Vec2 corner = clamp_to_arena({4.0, 4.0}, a);
  CHECK(corner.x == doctest::Approx(3.98));
  CHECK(corner.y == doctest::Approx(3.98));
  CHECK(a.within_margins(corner, 1e-12));
  CHECK_FALSE(a.within_margins({0.01, 2.0}));
}

TEST_CASE("validation names the offending field") {
  Arena bad;
  bad.width = -1.0;
  try {
    bad.validate();
    FAIL("expected a ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "arena.width");
  }

  const Arena arena;
  Voi v{"a", {1.0, 1.0}, 0.05, 1.2, std::nullopt};
  try {
    v.validate(arena, "vois[3]");
    FAIL("expected a ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "vois[3].prior");
  }
  v.prior = 0.5;
  v.position = {5.0, 1.0};
  CHECK_THROWS_AS(v.validate(arena), ValidationError);

  SimConfig c;
  c.omega = 1.5;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = SimConfig{};
  c.speed.fast_speed = 0.1;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("physical offset moves the overlay point") {
  Voi v{"a", {1.0, 1.0}, 0.05, 1.0, Vec2{0.1, -0.2}};
  CHECK(v.physical_position().x == doctest::Approx(1.1));
  CHECK(v.physical_position().y == doctest::Approx(0.8));
}

TEST_CASE("obstacle radius shrinks near a VOI") {
  const std::vector<Voi> vois{{"a", {2.0, 2.0}, 0.05, 1.0, std::nullopt}};
  SimConfig config;
  auto at_surface = [&](double s) {
    return UserState{{{2.0 - 0.05 - s, 2.0}, 0.0}, true, 0.0};
  };

  CHECK(obstacle_radius(at_surface(2.0), vois, config) == 0.45);
  CHECK(obstacle_radius(at_surface(0.0), vois, config) == 0.20);

  // Ramp from 0.20 m to 0.30 m of surface distance, as in the short-ramp setting.
  config.near_transition = 0.10;
  CHECK(obstacle_radius(at_surface(0.25), vois, config) == doctest::Approx(0.325).epsilon(1e-12));
  CHECK(obstacle_radius(at_surface(0.20), vois, config) == doctest::Approx(0.20));
  CHECK(obstacle_radius(at_surface(0.30), vois, config) == doctest::Approx(0.45));

  // Default ramp is 0.60 m wide: midpoint at 0.50 m.
  config = SimConfig{};
  CHECK(obstacle_radius(at_surface(0.50), vois, config) == doctest::Approx(0.325).epsilon(1e-12));

  // The nearest VOI decides.
  const std::vector<Voi> two{{"a", {2.0, 2.0}, 0.05, 1.0, std::nullopt},
                             {"b", {0.5, 0.5}, 0.05, 1.0, std::nullopt}};
  const UserState near_b{{{0.5, 0.6}, 0.0}, true, 0.0};
  CHECK(obstacle_radius(near_b, two, config) == 0.20);

  // Radius stays within [near, far] everywhere.
  for (double s = 0.0; s < 3.0; s += 0.013) {
    const double r = obstacle_radius(at_surface(s), vois, config);
    CHECK(r >= config.obstacle_radius_near);
    CHECK(r <= config.obstacle_radius_far);
  }
}
