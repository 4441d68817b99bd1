#include "encounter/simulation.hpp"

#include <utility>

namespace encounter {

Simulator::Simulator(Arena arena, std::vector<Voi> vois, SimConfig config, Vec2 robot_start)
    : Simulator(std::move(arena), std::move(vois), std::move(config),
                ProxyState{robot_start, {}}, RobotState{robot_start, {}}) {}

Simulator::Simulator(Arena arena, std::vector<Voi> vois, SimConfig config, ProxyState proxy,
                     RobotState robot)
    : Simulator(std::move(arena), std::move(vois), std::move(config),
                SimState{proxy, robot, CommandPosition{proxy.position, true}, {}, std::nullopt}) {}

Simulator::Simulator(Arena arena, std::vector<Voi> vois, SimConfig config, SimState state)
    : arena_(std::move(arena)),
      vois_(std::move(vois)),
      config_(std::move(config)),
      proxy_(state.proxy),
      robot_(state.robot),
      command_(state.command),
      weights_(std::move(state.weights)),
      have_tracked_user_(state.last_tracked_user.has_value()),
      last_tracked_user_(state.last_tracked_user.value_or(UserState{})) {
  arena_.validate();
  config_.validate();
  for (std::size_t i = 0; i < vois_.size(); ++i) {
    vois_[i].validate(arena_, "vois[" + std::to_string(i) + "]");
  }
  last_.proxy = proxy_;
  last_.robot = robot_;
  last_.command = command_;
  last_.weights = weights_;
}

const Frame& Simulator::step(const UserState& user) {
  if (user.tracked) {
    last_tracked_user_ = user;
    have_tracked_user_ = true;
    if (!vois_.empty()) {
      weights_ = compute_weights(user, vois_, config_);
      command_ = command_position(weights_, vois_, command_, arena_);
    } else {
      weights_ = {};
      command_.degenerate = true;
    }
  }

  std::vector<ObstacleState> obstacles;
  obstacles.reserve(1 + static_obstacles_.size());
  if (have_tracked_user_) {
    obstacles.push_back(user_obstacle(last_tracked_user_, vois_, config_));
  }
  obstacles.insert(obstacles.end(), static_obstacles_.begin(), static_obstacles_.end());

  proxy_ = step_proxy(proxy_, command_, obstacles, arena_, config_);
  robot_ = step_robot(robot_, proxy_, user, arena_, config_, obstacles);

  last_.t = user.time;
  last_.user = user;
  last_.weights = weights_;
  last_.command = command_;
  last_.obstacle = have_tracked_user_ ? obstacles.front() : ObstacleState{};
  last_.proxy = proxy_;
  last_.robot = robot_;
  return last_;
}

SimState Simulator::state() const {
  SimState s{proxy_, robot_, command_, weights_, std::nullopt};
  if (have_tracked_user_) s.last_tracked_user = last_tracked_user_;
  return s;
}

void Simulator::latch_estop() {
  robot_ = encounter::latch_estop(robot_);
  last_.robot = robot_;
}

void Simulator::release_estop() {
  robot_ = encounter::release_estop(robot_);
  last_.robot = robot_;
}

void Simulator::set_vois(std::vector<Voi> vois) {
  for (std::size_t i = 0; i < vois.size(); ++i) {
    vois[i].validate(arena_, "vois[" + std::to_string(i) + "]");
  }
  vois_ = std::move(vois);
  weights_ = {};
}

void Simulator::set_omega(double omega) {
  SimConfig next = config_;
  next.omega = omega;
  next.validate();
  config_ = next;
}

void Simulator::set_static_obstacles(std::vector<ObstacleState> obstacles) {
  static_obstacles_ = std::move(obstacles);
}

}  // namespace encounter
