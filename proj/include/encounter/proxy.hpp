#pragma once

// The virtual proxy: a point mass pulled toward the command position by a
// spring-damper, repelled by the user obstacle, and never allowed inside it.

#include <span>

#include "encounter/geometry.hpp"
#include "encounter/intention.hpp"

namespace encounter {

struct ProxyState {
  Vec2 position;
  Vec2 velocity;

  bool operator==(const ProxyState&) const = default;
};

struct ObstacleState {
  Vec2 center;
  double radius = 0.45;
  double influence_band = 0.30;

  bool operator==(const ObstacleState&) const = default;
};

/// User obstacle radius: near radius once the user is within
/// near_voi_distance of any VOI surface, far radius beyond
/// near_voi_distance + near_transition, linear in between.
double obstacle_radius(const UserState& user, std::span<const Voi> vois, const SimConfig& config);

/// The obstacle carried by the user. Its influence band shrinks with the
/// radius so that a user standing at a VOI does not push the proxy off it.
ObstacleState user_obstacle(const UserState& user, std::span<const Voi> vois,
                            const SimConfig& config);

Vec2 spring_force(const ProxyState& proxy, const CommandPosition& command, const SimConfig& config);

/// Outward force k_obs * s^2 with s the normalized depth into the band.
Vec2 obstacle_force(const ProxyState& proxy, const ObstacleState& obstacle, double k_obs);

/// Nearest point to `p` that lies inside the arena margins and outside the
/// obstacle disc. Falls back to clamp_to_arena when no such point exists.
Vec2 project_clear(Vec2 p, const ObstacleState& obstacle, const Arena& arena);

/// One semi-implicit Euler step followed by hard projection and arena clamp.
ProxyState step_proxy(const ProxyState& proxy, const CommandPosition& command,
                      const ObstacleState& obstacle, const Arena& arena, const SimConfig& config);

/// Variant with extra static obstacles (furniture). The first obstacle is the
/// user's; it is projected last so its clearance always holds.
ProxyState step_proxy(const ProxyState& proxy, const CommandPosition& command,
                      std::span<const ObstacleState> obstacles, const Arena& arena,
                      const SimConfig& config);

}  // namespace encounter
