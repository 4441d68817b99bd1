#pragma once

// Interactive session: one authoritative simulation driven by protocol
// messages. It has no networking of its own; the server feeds it text and
// ships its ticks, and tests drive it directly.
//
// Messages are applied at the start of the next physics step, in the order
// they were submitted. See docs/protocol.md for the schema.

#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "encounter/io.hpp"
#include "encounter/simulation.hpp"
#include "encounter/trial.hpp"

namespace encounter {

inline constexpr int kProtocolVersion = 1;
inline constexpr double kMaxSteeringSpeed = 2.0;
inline constexpr int kStepsPerBroadcast = 3;  // 75 Hz physics, 25 Hz ticks

struct Steering {
  Vec2 velocity;  // world frame, m/s
  double heading_rate = 0.0;
};

struct ContactInfo {
  std::string voi_id;
  double robot_distance = 0.0;  // robot to the VOI's physical position
  bool success = false;
};

/// Immutable snapshot of everything a client renders.
struct Tick {
  std::uint64_t step = 0;
  double t = 0.0;
  bool paused = false;
  bool recording = false;
  Arena arena;
  double omega = 0.0;
  std::vector<Voi> vois;
  std::optional<std::string> target;
  Frame frame;
  double min_clearance = 0.0;  // infinity before the first tracked frame
  std::optional<std::pair<std::string, double>> last_detection;
  std::optional<ContactInfo> contact;  // VOI the user is touching right now
  std::optional<TrialResult> trial;    // metrics at the first contact
};

std::string tick_json(const Tick& tick);
std::string error_json(std::string_view message, std::string_view request_type = {});
std::string warning_json(std::string_view message);
std::string hello_json(const SimConfig& config);

class Session {
 public:
  explicit Session(Scenario scenario, std::optional<std::filesystem::path> record_dir = {});
  ~Session();

  /// Parses and queues one message. A malformed message returns an error
  /// reply and leaves the queue and state untouched.
  std::optional<std::string> submit(std::string_view text);

  /// Applies queued messages, then advances one physics step unless paused.
  /// Rejected edits produce error replies in the outbox.
  void step();

  Tick tick() const;
  /// Error and warning replies produced since the last call.
  std::vector<std::string> take_outbox();

  /// Starts appending a frame per physics step to `trace`, after writing a
  /// scenario snapshot to snapshot_path(trace). Metrics restart here so the
  /// recording replays to the same trial result.
  void start_recording(const std::filesystem::path& trace);
  void stop_recording();
  bool recording() const { return writer_ != nullptr; }
  std::optional<std::filesystem::path> recording_path() const;

  const Simulator& simulator() const { return sim_; }
  const UserState& user() const { return user_; }
  /// The current scene as a scenario (user and robot at their current spots).
  Scenario snapshot() const;
  std::uint64_t steps() const { return steps_; }
  bool paused() const { return paused_; }

  /// A parsed, schema-checked client message.
  struct Command;

 private:
  void apply(const Command& c);
  void scene_changed();
  void restart(const Scenario& scenario);
  void restart_monitor();
  void warn(const std::string& message);

  Scenario initial_;
  Scenario scene_;  // vois, config and target in force
  std::optional<std::filesystem::path> record_dir_;
  Simulator sim_;
  TrialMonitor monitor_;
  UserState user_;
  Steering steering_;
  bool tracking_lost_ = false;
  bool paused_ = false;
  std::uint64_t steps_ = 0;
  std::uint64_t recordings_ = 0;
  std::optional<ContactInfo> contact_;

  std::deque<Command> inbox_;
  std::vector<std::string> outbox_;
  std::unique_ptr<TraceWriter> writer_;
};

/// Scenario file written next to a trace: session.jsonl -> session.scenario.json.
std::filesystem::path snapshot_path(const std::filesystem::path& trace);

/// Replays a recorded trace from its scenario through run_trial. The trial
/// timeout is lifted so long sessions replay in full.
TrialResult replay_recording(const Scenario& scenario, std::vector<TraceFrame> frames,
                             bool record_frames = false);

}  // namespace encounter
