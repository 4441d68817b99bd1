#include "encounter/proxy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace encounter {

namespace {

constexpr double kCoincident = 1e-6;
constexpr double kBoxTol = 1e-12;

Vec2 outward_direction(Vec2 p, Vec2 center) {
  const Vec2 d = p - center;
  const double n = d.norm();
  if (n < kCoincident) return {1.0, 0.0};
  return d / n;
}

}  // namespace

double obstacle_radius(const UserState& user, std::span<const Voi> vois, const SimConfig& config) {
  if (vois.empty()) return config.obstacle_radius_far;
  double nearest = std::numeric_limits<double>::infinity();
  for (const Voi& voi : vois) nearest = std::min(nearest, surface_distance(user.pose.position, voi));

  if (nearest <= config.near_voi_distance) return config.obstacle_radius_near;
  const double far_from = config.near_voi_distance + config.near_transition;
  if (nearest >= far_from) return config.obstacle_radius_far;
  const double s = (nearest - config.near_voi_distance) / config.near_transition;
  return config.obstacle_radius_near + s * (config.obstacle_radius_far - config.obstacle_radius_near);
}

ObstacleState user_obstacle(const UserState& user, std::span<const Voi> vois,
                            const SimConfig& config) {
  const double radius = obstacle_radius(user, vois, config);
  const double span = config.obstacle_radius_far - config.obstacle_radius_near;
  const double scale = span > 0.0 ? (radius - config.obstacle_radius_near) / span : 1.0;
  return {user.pose.position, radius, config.influence_band * scale};
}

Vec2 spring_force(const ProxyState& proxy, const CommandPosition& command, const SimConfig& config) {
  return (command.target - proxy.position) * config.spring_stiffness -
         proxy.velocity * config.spring_damping;
}

Vec2 obstacle_force(const ProxyState& proxy, const ObstacleState& obstacle, double k_obs) {
  if (obstacle.influence_band <= 0.0) return {};
  const double dist = distance(proxy.position, obstacle.center);
  const double s = std::clamp(
      (obstacle.radius + obstacle.influence_band - dist) / obstacle.influence_band, 0.0, 1.0);
  if (s == 0.0) return {};
  return outward_direction(proxy.position, obstacle.center) * (k_obs * s * s);
}

Vec2 project_clear(Vec2 p, const ObstacleState& obstacle, const Arena& arena) {
  const Vec2 c = obstacle.center;
  const double r = obstacle.radius;
  const double lo_x = arena.safety_margin, hi_x = arena.width - arena.safety_margin;
  const double lo_y = arena.safety_margin, hi_y = arena.length - arena.safety_margin;

  auto in_box = [&](Vec2 q) {
    return q.x >= lo_x - kBoxTol && q.x <= hi_x + kBoxTol && q.y >= lo_y - kBoxTol &&
           q.y <= hi_y + kBoxTol;
  };
  auto clear = [&](Vec2 q) { return distance(q, c) >= r; };

  const Vec2 clamped = clamp_to_arena(p, arena);
  if (clamped == p && clear(p)) return p;

  Vec2 best = clamped;
  double best_d = std::numeric_limits<double>::infinity();
  auto consider = [&](Vec2 q) {
    if (!in_box(q) || !clear(q)) return;
    q = clamp_to_arena(q, arena);
    if (!clear(q)) return;
    const double d = distance(p, q);
    if (d < best_d) {
      best_d = d;
      best = q;
    }
  };

  consider(clamped);
  // Radial projection onto the circle. Scale slightly past r so rounding
  // never leaves the point a hair inside.
  consider(c + outward_direction(p, c) * (r * (1.0 + 1e-12)));

  // Feet of perpendiculars onto the box edges, and circle/edge crossings.
  const std::array<double, 2> xs{lo_x, hi_x};
  const std::array<double, 2> ys{lo_y, hi_y};
  for (double x : xs) {
    consider({x, std::clamp(p.y, lo_y, hi_y)});
    const double h2 = r * r - (x - c.x) * (x - c.x);
    if (h2 >= 0.0) {
      const double h = std::sqrt(h2) * (1.0 + 1e-12) + 1e-15;
      consider({x, c.y + h});
      consider({x, c.y - h});
    }
  }
  for (double y : ys) {
    consider({std::clamp(p.x, lo_x, hi_x), y});
    const double h2 = r * r - (y - c.y) * (y - c.y);
    if (h2 >= 0.0) {
      const double h = std::sqrt(h2) * (1.0 + 1e-12) + 1e-15;
      consider({c.x + h, y});
      consider({c.x - h, y});
    }
  }
  for (double x : xs)
    for (double y : ys) consider({x, y});

  return best;
}

ProxyState step_proxy(const ProxyState& proxy, const CommandPosition& command,
                      const ObstacleState& obstacle, const Arena& arena, const SimConfig& config) {
  return step_proxy(proxy, command, std::span<const ObstacleState>(&obstacle, 1), arena, config);
}

ProxyState step_proxy(const ProxyState& proxy, const CommandPosition& command,
                      std::span<const ObstacleState> obstacles, const Arena& arena,
                      const SimConfig& config) {
  if (!(config.dt > 0.0)) throw std::invalid_argument("step_proxy: dt must be > 0");

  Vec2 force = spring_force(proxy, command, config);
  for (const ObstacleState& o : obstacles) force += obstacle_force(proxy, o, config.obstacle_stiffness);

  ProxyState next;
  next.velocity = proxy.velocity + force * (config.dt / config.proxy_mass);
  const Vec2 free_position = proxy.position + next.velocity * config.dt;
  Vec2 p = free_position;

  // Static obstacles first, the user's last.
  for (std::size_t i = obstacles.size(); i-- > 0;) p = project_clear(p, obstacles[i], arena);
  if (obstacles.empty()) p = clamp_to_arena(p, arena);

  for (const ObstacleState& o : obstacles) {
    if (p == free_position) break;
    const double dist = distance(p, o.center);
    if (dist <= o.radius * (1.0 + 1e-9)) {
      const Vec2 n = outward_direction(p, o.center);
      const double vn = next.velocity.dot(n);
      if (vn < 0.0) next.velocity -= n * vn;
    }
  }
  if (p.x != free_position.x &&
      (p.x <= arena.safety_margin || p.x >= arena.width - arena.safety_margin)) {
    next.velocity.x = 0.0;
  }
  if (p.y != free_position.y &&
      (p.y <= arena.safety_margin || p.y >= arena.length - arena.safety_margin)) {
    next.velocity.y = 0.0;
  }
  next.position = p;
  return next;
}

}  // namespace encounter
