#pragma once

#include <span>

// Kinematic stand-in for the Cartesian gantry. It pursues the proxy under the
// measured distance-dependent speed profile and an acceleration limit, and
// applies the software safety stops.

#include <string_view>

#include "encounter/geometry.hpp"
#include "encounter/proxy.hpp"

namespace encounter {

enum class RobotStatus { active, halted_tracking_loss, halted_estop, halted_rail_limit };

std::string_view to_string(RobotStatus status);
/// Throws std::invalid_argument for unknown names.
RobotStatus robot_status_from_string(std::string_view name);

struct RobotState {
  Vec2 position;
  Vec2 velocity;
  RobotStatus status = RobotStatus::active;
  bool estop_latched = false;
  // Tracking bookkeeping for the 0.5 s rule.
  bool user_tracked = true;
  double last_tracked_time = 0.0;

  bool operator==(const RobotState&) const = default;
};

/// Speed cap as a function of the remaining distance to the proxy.
double speed_cap(double remaining, const SpeedProfile& profile = {});

/// One control step. The robot pursues the proxy, steering around each
/// `keep_out` obstacle's radius plus influence band and never moving into
/// it; if the zone has moved onto the robot, it backs out at the capped
/// speed.
RobotState step_robot(const RobotState& robot, const ProxyState& proxy, const UserState& user,
                      const Arena& arena, const SimConfig& config,
                      std::span<const ObstacleState> keep_out = {});

RobotState latch_estop(RobotState robot);

/// Clears the latch. The robot only becomes active again if the user was
/// tracked on the last step; otherwise it reports halted_tracking_loss.
RobotState release_estop(RobotState robot);

}  // namespace encounter
