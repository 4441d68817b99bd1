#pragma once

// Planar geometry, arena model and shared configuration.
//
// Frame convention: origin at one arena corner, +x along the width, +y along
// the length, headings counter-clockwise from +x. Meters, radians, seconds.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

namespace encounter {

/// Raised when a value violates a domain invariant. `field` names the
/// offending value using a path such as `vois[2].prior`.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(Vec2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;

  constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

/// Unit vector for a heading angle.
inline Vec2 direction(double heading) {
  return {std::cos(heading), std::sin(heading)};
}

struct Pose {
  Vec2 position;
  double heading = 0.0;  // (-pi, pi]

  bool operator==(const Pose&) const = default;
};

struct Arena {
  double width = 4.0;
  double length = 4.0;
  double safety_margin = 0.02;

  void validate() const;
  bool contains(Vec2 p) const;
  /// True when p respects the safety margin on every side (tolerance tol).
  bool within_margins(Vec2 p, double tol = 0.0) const;

  bool operator==(const Arena&) const = default;
};

/// Virtual object of interest.
struct Voi {
  std::string id;
  Vec2 position;
  double radius = 0.05;
  double prior = 1.0;
  std::optional<Vec2> physical_offset;

  /// Where the column has to be for this object to be overlaid.
  Vec2 physical_position() const {
    return physical_offset ? position + *physical_offset : position;
  }

  /// Throws ValidationError with `path` as the field prefix.
  void validate(const Arena& arena, const std::string& path = "voi") const;

  bool operator==(const Voi&) const = default;
};

/// Surface distance from a point to a VOI disc, floored at zero.
inline double surface_distance(Vec2 p, const Voi& voi) {
  return std::max(0.0, distance(p, voi.position) - voi.radius);
}

struct UserState {
  Pose pose;
  bool tracked = true;
  double time = 0.0;

  bool operator==(const UserState&) const = default;
};

/// Measured column speed regimes: slow for short hops, fast for long ones,
/// linear in between.
struct SpeedProfile {
  double slow_speed = 0.5;
  double fast_speed = 1.1;
  double slow_below = 0.8;
  double fast_above = 1.0;

  bool operator==(const SpeedProfile&) const = default;
};

struct SimConfig {
  double omega = 0.175;
  double dt = 1.0 / 75.0;
  double stickiness_threshold = 0.8;

  double obstacle_radius_far = 0.45;
  double obstacle_radius_near = 0.20;
  double near_voi_distance = 0.20;
  // Width of the surface-distance ramp between the near and far radius.
  double near_transition = 0.60;
  double influence_band = 0.30;
  double obstacle_stiffness = 120.0;

  double success_distance = 0.10;
  // A touch registers when the user's surface distance to a VOI drops to this.
  double contact_reach = 0.15;

  double spring_stiffness = 40.0;
  double spring_damping = 12.6;
  double proxy_mass = 1.0;

  SpeedProfile speed;
  double robot_max_accel = 3.0;

  double tracking_loss_timeout = 0.5;
  double trial_timeout = 120.0;
  std::uint64_t rng_seed = 0;

  void validate() const;

  bool operator==(const SimConfig&) const = default;
};

/// Wraps an angle into (-pi, pi]. Throws std::invalid_argument on NaN/inf.
double normalize_angle(double a);

/// Clamps each coordinate into [margin, extent - margin].
Vec2 clamp_to_arena(Vec2 p, const Arena& arena);

}  // namespace encounter
