#pragma once

// The per-frame pipeline shared by batch trials, trace replay and the live
// service: intention weights -> command position -> user obstacle -> proxy
// step -> robot step. Keeping a single implementation is what makes a live
// session replay bit-identically in batch.

#include <optional>
#include <vector>

#include "encounter/geometry.hpp"
#include "encounter/intention.hpp"
#include "encounter/proxy.hpp"
#include "encounter/robot.hpp"

namespace encounter {

struct Frame {
  double t = 0.0;
  UserState user;
  WeightVector weights;
  CommandPosition command;
  ObstacleState obstacle;
  ProxyState proxy;
  RobotState robot;
};

/// Everything the simulator carries from one step to the next apart from the
/// scene itself. Restoring it resumes a run bit-identically.
struct SimState {
  ProxyState proxy;
  RobotState robot;
  CommandPosition command;
  WeightVector weights;
  std::optional<UserState> last_tracked_user;

  bool operator==(const SimState&) const = default;
};

class Simulator {
 public:
  /// Proxy and robot start at rest at `robot_start`.
  Simulator(Arena arena, std::vector<Voi> vois, SimConfig config, Vec2 robot_start);
  /// Resume from an explicit dynamic state.
  Simulator(Arena arena, std::vector<Voi> vois, SimConfig config, ProxyState proxy,
            RobotState robot);
  Simulator(Arena arena, std::vector<Voi> vois, SimConfig config, SimState state);

  /// Advances one physics step of config.dt using the given user sample.
  /// While the user is untracked the last tracked pose, weights and command
  /// are held.
  const Frame& step(const UserState& user);

  void latch_estop();
  void release_estop();

  void set_vois(std::vector<Voi> vois);
  void set_omega(double omega);
  void set_static_obstacles(std::vector<ObstacleState> obstacles);

  const Arena& arena() const { return arena_; }
  const SimConfig& config() const { return config_; }
  const std::vector<Voi>& vois() const { return vois_; }
  const ProxyState& proxy() const { return proxy_; }
  const RobotState& robot() const { return robot_; }
  const CommandPosition& command() const { return command_; }
  SimState state() const;
  /// The most recent frame; before the first step it holds the start state.
  const Frame& last() const { return last_; }

 private:
  Arena arena_;
  std::vector<Voi> vois_;
  SimConfig config_;
  std::vector<ObstacleState> static_obstacles_;

  ProxyState proxy_;
  RobotState robot_;
  CommandPosition command_;
  WeightVector weights_;
  bool have_tracked_user_ = false;
  UserState last_tracked_user_;
  Frame last_;
};

}  // namespace encounter
