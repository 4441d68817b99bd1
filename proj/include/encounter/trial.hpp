#pragma once

// Random trial layouts, the synthetic walker, user sources, and single-trial
// execution with its metrics.

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "encounter/geometry.hpp"
#include "encounter/simulation.hpp"

namespace encounter {

inline constexpr int kMaxDistractors = 4;
inline constexpr double kBallRadius = 0.05;
inline constexpr double kMinVoiSpacing = 0.10;
inline constexpr double kMinUserClearance = 0.30;
inline constexpr std::string_view kTargetId = "target";
// Mixed into a trial seed to seed its walker.
inline constexpr std::uint64_t kWalkerSeedSalt = 0x77616c6bULL;

using Rng = std::mt19937_64;

struct TrialSpec {
  std::uint64_t seed = 0;
  int n_distractors = 0;
  std::vector<Voi> vois;  // vois.front() is the designated target
  Pose user_start;
  Vec2 robot_start;

  const Voi& target() const { return vois.front(); }
};

/// Rejection-samples a layout. Throws std::runtime_error if the constraints
/// cannot be met in 10,000 attempts.
TrialSpec generate_trial(std::uint64_t seed, int n_distractors, const Arena& arena,
                         const Pose& user_start);
/// As above with the user start (position and heading) drawn from the seed.
TrialSpec generate_trial(std::uint64_t seed, int n_distractors, const Arena& arena);

/// Splits probability mass: the target gets `target_prior`, distractors share
/// the remainder equally.
void assign_target_prior(TrialSpec& spec, double target_prior);

struct WalkerParams {
  std::string name = "default";
  double walk_speed = 0.325;
  double decision_delay_min = 4.0;
  double decision_delay_max = 6.0;
  double turn_rate = std::numbers::pi;
  double gaze_noise = 0.1;
  // Seconds spent looking at each VOI while scanning.
  double scan_dwell = 0.8;
  // Distance before contact over which the walker slows to reach out.
  double approach_slowdown = 0.6;
  double approach_min_fraction = 0.35;

  void validate() const;

  bool operator==(const WalkerParams&) const = default;
};

/// Evaluation cohort: six archetypes, each at three walking paces.
std::vector<WalkerParams> default_cohort();

/// Synthetic user: scans the VOIs until its decision delay expires, turns to
/// the target and walks to it, slowing as it reaches out.
class Walker {
 public:
  enum class Phase { scan, turn, walk, contact };

  Walker(const TrialSpec& spec, WalkerParams params, double contact_reach, std::uint64_t seed);

  /// Advances to time `t` (one step of `dt`) and returns the new user state.
  UserState step(double t, double dt);

  const UserState& state() const { return state_; }
  Phase phase() const { return phase_; }
  double decision_delay() const { return decision_delay_; }

 private:
  double turn_toward(double bearing, double dt);
  double bearing_to(Vec2 p) const;

  std::vector<Voi> vois_;
  WalkerParams params_;
  double contact_reach_;
  Rng rng_;
  std::normal_distribution<double> unit_normal_{0.0, 1.0};

  UserState state_;
  Phase phase_ = Phase::scan;
  double nominal_heading_ = 0.0;
  double gaze_offset_ = 0.0;
  double decision_delay_ = 0.0;
  std::vector<std::size_t> scan_order_;
  std::size_t scan_index_ = 0;
  double dwell_left_ = 0.0;
};

/// Anything that yields one user sample per physics step.
class UserSource {
 public:
  virtual ~UserSource() = default;
  /// Next sample at time t, or nullopt when the source is exhausted.
  virtual std::optional<UserState> next(double t, double dt) = 0;
  /// Whether the e-stop should be latched on this sample (replay only).
  virtual bool estop() const { return false; }
};

class WalkerSource : public UserSource {
 public:
  explicit WalkerSource(Walker walker) : walker_(std::move(walker)) {}
  std::optional<UserState> next(double t, double dt) override { return walker_.step(t, dt); }
  const Walker& walker() const { return walker_; }

 private:
  Walker walker_;
};

struct SafetyStats {
  std::size_t frames = 0;
  double max_proxy_penetration = 0.0;  // radius - distance, floored at 0
  double max_robot_intrusion = 0.0;    // same for the robot
  std::size_t speed_cap_violations = 0;
  std::size_t margin_violations = 0;
};

struct TrialResult {
  bool success = false;
  std::optional<std::string> contacted_id;
  std::optional<double> distance_at_contact;
  std::optional<double> detection_time;
  double min_user_proxy_clearance = 0.0;
  bool collision = false;
  double duration = 0.0;
  double mean_proxy_robot_distance = 0.0;
  // Mean over the last second before contact; nullopt without contact.
  std::optional<double> final_second_proxy_robot_distance;
  SafetyStats safety;
  std::vector<Frame> frames;  // filled when requested
};

struct TrialOptions {
  bool record_frames = false;
  // Contact with any VOI ends the trial when no target is designated.
  std::optional<std::string> target_id;
  // Resume from a recorded state instead of starting at rest at robot_start.
  std::optional<SimState> initial_state;
};

struct MetricTracker;

/// Trial bookkeeping fed one frame at a time. Batch trials and live sessions
/// both use it, so a replayed recording reports the same metrics.
class TrialMonitor {
 public:
  TrialMonitor(const Arena& arena, std::vector<Voi> vois, const SimConfig& config,
               Vec2 robot_start, std::optional<std::string> target_id = std::nullopt);
  ~TrialMonitor();
  TrialMonitor(TrialMonitor&&) noexcept;
  TrialMonitor& operator=(TrialMonitor&&) noexcept;

  /// Returns true once the user has touched the target (any VOI without
  /// one). Later frames are ignored.
  bool observe(const Frame& frame);

  bool contacted() const { return contacted_.has_value(); }
  double min_user_proxy_clearance() const;
  const SafetyStats& safety() const;
  /// VOI whose weight most recently became sticky, and when.
  std::optional<std::pair<std::string, double>> last_detection() const;
  /// Metrics so far; duration is the time of the last observed frame.
  TrialResult result() const;

 private:
  std::vector<Voi> vois_;
  SimConfig config_;
  std::unique_ptr<MetricTracker> tracker_;
  std::optional<std::size_t> target_index_;
  std::optional<std::size_t> contacted_;
  bool have_user_ = false;
  double t_ = 0.0;
  Vec2 robot_;
};

/// Runs intention -> proxy -> robot each frame until the user touches the
/// target, the source runs out, or config.trial_timeout elapses.
TrialResult run_trial(const Arena& arena, std::span<const Voi> vois, Vec2 robot_start,
                      UserSource& source, const SimConfig& config,
                      const TrialOptions& options = {});

/// Walker trial on a generated layout.
TrialResult run_trial(const TrialSpec& spec, const WalkerParams& walker, const Arena& arena,
                      const SimConfig& config, bool record_frames = false);

/// Runs any simulator forward with a source, without trial bookkeeping.
/// Mostly useful for replay equivalence checks.
std::vector<Frame> replay(Simulator& sim, UserSource& source, double dt);

}  // namespace encounter
