#include "encounter/geometry.hpp"

#include <algorithm>

namespace encounter {

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ValidationError(field, what);
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

double normalize_angle(double a) {
  if (!std::isfinite(a)) throw std::invalid_argument("normalize_angle: non-finite angle");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  // remainder() is exact and lands in [-pi, pi]; fold -pi onto +pi.
  double r = std::remainder(a, two_pi);
  if (r <= -std::numbers::pi) r += two_pi;
  return r;
}

Vec2 clamp_to_arena(Vec2 p, const Arena& arena) {
  const double m = arena.safety_margin;
  return {std::clamp(p.x, m, arena.width - m), std::clamp(p.y, m, arena.length - m)};
}

void Arena::validate() const {
  require(finite_positive(width), "arena.width", "must be > 0");
  require(finite_positive(length), "arena.length", "must be > 0");
  require(std::isfinite(safety_margin) && safety_margin >= 0.0 &&
              safety_margin < std::min(width, length) / 2.0,
          "arena.safety_margin", "must be in [0, min(width, length)/2)");
}

bool Arena::contains(Vec2 p) const {
  return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= length;
}

bool Arena::within_margins(Vec2 p, double tol) const {
  const double m = safety_margin;
  return p.x >= m - tol && p.x <= width - m + tol && p.y >= m - tol &&
         p.y <= length - m + tol;
}

void Voi::validate(const Arena& arena, const std::string& path) const {
  require(!id.empty(), path + ".id", "must be non-empty");
  require(position.finite(), path + ".position", "must be finite");
  require(arena.contains(position), path + ".position", "must lie inside the arena");
  require(finite_positive(radius), path + ".radius", "must be > 0");
  require(std::isfinite(prior) && prior >= 0.0 && prior <= 1.0, path + ".prior",
          "must be in [0, 1]");
  if (physical_offset) {
    require(physical_offset->finite(), path + ".physical_offset", "must be finite");
  }
}

void SimConfig::validate() const {
  require(finite_positive(dt), "config.dt", "must be > 0");
  require(std::isfinite(omega) && omega >= 0.0 && omega <= 1.0, "config.omega",
          "must be in [0, 1]");
  require(std::isfinite(stickiness_threshold) && stickiness_threshold >= 0.0 &&
              stickiness_threshold <= 1.0,
          "config.stickiness_threshold", "must be in [0, 1]");
  require(finite_positive(obstacle_radius_far), "config.obstacle_radius_far", "must be > 0");
  require(finite_positive(obstacle_radius_near), "config.obstacle_radius_near", "must be > 0");
  require(obstacle_radius_near <= obstacle_radius_far, "config.obstacle_radius_near",
          "must not exceed obstacle_radius_far");
  require(finite_positive(near_voi_distance), "config.near_voi_distance", "must be > 0");
  require(finite_positive(near_transition), "config.near_transition", "must be > 0");
  require(std::isfinite(influence_band) && influence_band >= 0.0, "config.influence_band",
          "must be >= 0");
  require(finite_positive(obstacle_stiffness), "config.obstacle_stiffness", "must be > 0");
  require(finite_positive(success_distance), "config.success_distance", "must be > 0");
  require(std::isfinite(contact_reach) && contact_reach >= 0.0, "config.contact_reach",
          "must be >= 0");
  require(finite_positive(spring_stiffness), "config.spring_stiffness", "must be > 0");
  require(finite_positive(spring_damping), "config.spring_damping", "must be > 0");
  require(finite_positive(proxy_mass), "config.proxy_mass", "must be > 0");
  require(finite_positive(speed.slow_speed), "config.speed.slow_speed", "must be > 0");
  require(finite_positive(speed.fast_speed) && speed.fast_speed >= speed.slow_speed,
          "config.speed.fast_speed", "must be >= slow_speed");
  require(finite_positive(speed.slow_below), "config.speed.slow_below", "must be > 0");
  require(std::isfinite(speed.fast_above) && speed.fast_above > speed.slow_below,
          "config.speed.fast_above", "must exceed slow_below");
  require(finite_positive(robot_max_accel), "config.robot_max_accel", "must be > 0");
  require(finite_positive(tracking_loss_timeout), "config.tracking_loss_timeout",
          "must be > 0");
  require(finite_positive(trial_timeout), "config.trial_timeout", "must be > 0");
}

}  // namespace encounter
