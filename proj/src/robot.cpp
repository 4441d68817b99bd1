#include "encounter/robot.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace encounter {

std::string_view to_string(RobotStatus status) {
  switch (status) {
    case RobotStatus::active: return "active";
    case RobotStatus::halted_tracking_loss: return "halted_tracking_loss";
    case RobotStatus::halted_estop: return "halted_estop";
    case RobotStatus::halted_rail_limit: return "halted_rail_limit";
  }
  return "active";
}

RobotStatus robot_status_from_string(std::string_view name) {
  for (auto s : {RobotStatus::active, RobotStatus::halted_tracking_loss, RobotStatus::halted_estop,
                 RobotStatus::halted_rail_limit}) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown robot status '" + std::string(name) + "'");
}

double speed_cap(double remaining, const SpeedProfile& profile) {
  if (remaining <= profile.slow_below) return profile.slow_speed;
  if (remaining >= profile.fast_above) return profile.fast_speed;
  const double s = (remaining - profile.slow_below) / (profile.fast_above - profile.slow_below);
  return profile.slow_speed + s * (profile.fast_speed - profile.slow_speed);
}

namespace {

Vec2 limit_norm(Vec2 v, double max_norm) {
  const double n = v.norm();
  if (n > max_norm && n > 0.0) return v * (max_norm / n);
  return v;
}

RobotState halt(RobotState robot, RobotStatus status) {
  robot.velocity = {};
  robot.status = status;
  return robot;
}

// The column stays out of the whole repulsion zone, not just the hard disc.
double keep_out_radius(const ObstacleState& o) { return o.radius + o.influence_band; }

// Point to head for so the straight path to `goal` clears `o`: the goal
// itself, or the tangent point on the side the goal lies.
Vec2 detour(Vec2 from, Vec2 goal, const ObstacleState& o) {
  const double radius = keep_out_radius(o);
  const Vec2 rel = from - o.center;
  const double dist = rel.norm();
  if (dist <= radius) return goal;
  const Vec2 seg = goal - from;
  const double len2 = seg.dot(seg);
  if (len2 == 0.0) return goal;
  const double t = std::clamp(-rel.dot(seg) / len2, 0.0, 1.0);
  if ((rel + seg * t).norm() >= radius) return goal;
  const double a = std::acos(radius / dist);
  const Vec2 u = rel / dist;
  const Vec2 left{u.x * std::cos(a) - u.y * std::sin(a), u.x * std::sin(a) + u.y * std::cos(a)};
  const Vec2 right{u.x * std::cos(a) + u.y * std::sin(a), -u.x * std::sin(a) + u.y * std::cos(a)};
  const Vec2 g = goal - o.center;
  const bool goal_left = u.x * g.y - u.y * g.x > 0.0;
  return o.center + (goal_left ? left : right) * radius;
}

}  // namespace

RobotState step_robot(const RobotState& robot, const ProxyState& proxy, const UserState& user,
                      const Arena& arena, const SimConfig& config,
                      std::span<const ObstacleState> keep_out) {
  if (!(config.dt > 0.0)) throw std::invalid_argument("step_robot: dt must be > 0");

  RobotState next = robot;
  next.user_tracked = user.tracked;
  if (user.tracked) next.last_tracked_time = user.time;

  if (next.estop_latched) return halt(next, RobotStatus::halted_estop);
  if (!user.tracked && user.time - next.last_tracked_time > config.tracking_loss_timeout) {
    return halt(next, RobotStatus::halted_tracking_loss);
  }

  const double dt = config.dt;
  const double a_max = config.robot_max_accel;
  const Vec2 gap = proxy.position - robot.position;
  const double remaining = gap.norm();
  const double cap = speed_cap(remaining, config.speed);

  // Reach the proxy this step if possible, never faster than the profile
  // allows, and slow enough to brake to rest on arrival.
  const double brake = std::sqrt(2.0 * a_max * remaining);
  Vec2 aim = proxy.position;
  for (const ObstacleState& o : keep_out) aim = detour(robot.position, aim, o);
  const Vec2 heading = aim - robot.position;
  const double reach = heading.norm();
  Vec2 desired;
  if (reach > 0.0) desired = heading * (std::min({remaining / dt, cap, brake}) / reach);
  Vec2 v = robot.velocity + limit_norm(desired - robot.velocity, a_max * dt);
  // The profile cap wins over the acceleration limit.
  v = limit_norm(v, cap);

  const Vec2 facing = direction(user.pose.heading);
  for (const ObstacleState& o : keep_out) {
    const double radius = keep_out_radius(o);
    const Vec2 rel = robot.position - o.center;
    const double dist = rel.norm();
    const Vec2 n = dist > 1e-9 ? rel / dist : Vec2{1.0, 0.0};
    if (dist < radius) {
      // The zone moved onto the column. Back out, stepping sideways out of
      // the walking line when the user is heading this way.
      Vec2 e = n;
      const bool on_user = distance(o.center, user.pose.position) < 1e-9;
      if (on_user && rel.dot(facing) > 0.0) {
        Vec2 side{-facing.y, facing.x};
        if (side.dot(rel) < 0.0) side = side * -1.0;
        e = side + n;
      }
      v = e * (cap / e.norm());
      break;
    }
    if ((robot.position + v * dt - o.center).norm() < radius) {
      const double inward = v.dot(n);
      if (inward < 0.0) v = v - n * inward;
    }
  }

  const Vec2 unclamped = robot.position + v * dt;
  const Vec2 clamped = clamp_to_arena(unclamped, arena);
  next.status = RobotStatus::active;
  if (clamped != unclamped) {
    next.position = clamped;
    return halt(next, RobotStatus::halted_rail_limit);
  }
  next.position = unclamped;
  next.velocity = v;
  return next;
}

RobotState latch_estop(RobotState robot) {
  robot.estop_latched = true;
  return halt(robot, RobotStatus::halted_estop);
}

RobotState release_estop(RobotState robot) {
  robot.estop_latched = false;
  robot.velocity = {};
  robot.status = robot.user_tracked ? RobotStatus::active : RobotStatus::halted_tracking_loss;
  return robot;
}

}  // namespace encounter
