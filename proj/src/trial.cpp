#include "encounter/trial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>

#include "encounter/seed.hpp"

namespace encounter {

namespace {

constexpr int kMaxRejections = 10000;
constexpr double kVoiInset = 0.25;
constexpr double kUserInset = 0.5;
constexpr double kRobotStartDistance = 0.9;
constexpr double kRobotInset = 0.1;
constexpr double kGazeTimeConstant = 0.6;
constexpr double kAligned = 1e-3;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vec2 uniform_point(Rng& rng, const Arena& arena, double inset) {
  return {uniform(rng, inset, arena.width - inset), uniform(rng, inset, arena.length - inset)};
}

Vec2 place_robot(Rng& rng, const Arena& arena, Vec2 user) {
  for (int i = 0; i < 64; ++i) {
    const Vec2 p = user + direction(uniform(rng, -std::numbers::pi, std::numbers::pi)) *
                              kRobotStartDistance;
    if (p.x >= kRobotInset && p.x <= arena.width - kRobotInset && p.y >= kRobotInset &&
        p.y <= arena.length - kRobotInset) {
      return p;
    }
  }
  const Vec2 center{arena.width / 2, arena.length / 2};
  const Vec2 away = center - user;
  const double n = away.norm();
  return clamp_to_arena(n > 0 ? user + away / n * kRobotStartDistance : center, arena);
}

}  // namespace

TrialSpec generate_trial(std::uint64_t seed, int n_distractors, const Arena& arena,
                         const Pose& user_start) {
  if (n_distractors < 0 || n_distractors > kMaxDistractors) {
    throw std::invalid_argument("generate_trial: n_distractors must be in 0..4");
  }
  arena.validate();
  Rng rng(seed);
  TrialSpec spec;
  spec.seed = seed;
  spec.n_distractors = n_distractors;
  spec.user_start = user_start;

  const int count = n_distractors + 1;
  int attempts = 0;
  while (static_cast<int>(spec.vois.size()) < count) {
    if (++attempts > kMaxRejections) {
      throw std::runtime_error("generate_trial: could not place VOIs after 10000 attempts");
    }
    const Vec2 c = uniform_point(rng, arena, kVoiInset);
    if (distance(c, user_start.position) < kMinUserClearance) continue;
    const bool spaced = std::all_of(spec.vois.begin(), spec.vois.end(), [&](const Voi& v) {
      return distance(v.position, c) >= kMinVoiSpacing;
    });
    if (!spaced) continue;
    Voi voi;
    voi.id = spec.vois.empty() ? std::string(kTargetId) : "d" + std::to_string(spec.vois.size());
    voi.position = c;
    voi.radius = kBallRadius;
    spec.vois.push_back(std::move(voi));
  }
  spec.robot_start = place_robot(rng, arena, user_start.position);
  return spec;
}

TrialSpec generate_trial(std::uint64_t seed, int n_distractors, const Arena& arena) {
  Rng rng(mix_seed(seed, 0x75736572ULL));  // "user"
  Pose start;
  start.position = uniform_point(rng, arena, kUserInset);
  start.heading = normalize_angle(uniform(rng, -std::numbers::pi, std::numbers::pi));
  return generate_trial(seed, n_distractors, arena, start);
}

void assign_target_prior(TrialSpec& spec, double target_prior) {
  if (!(target_prior >= 0.0 && target_prior <= 1.0)) {
    throw std::invalid_argument("assign_target_prior: prior must be in [0, 1]");
  }
  const std::size_t distractors = spec.vois.size() - 1;
  spec.vois.front().prior = target_prior;
  for (std::size_t i = 1; i < spec.vois.size(); ++i) {
    spec.vois[i].prior = (1.0 - target_prior) / static_cast<double>(distractors);
  }
}

void WalkerParams::validate() const {
  auto check = [&](bool ok, const char* field) {
    if (!ok) throw ValidationError(std::string("walker.") + field, "out of range");
  };
  check(std::isfinite(walk_speed) && walk_speed >= 0.0, "walk_speed");
  check(std::isfinite(decision_delay_min) && decision_delay_min >= 0.0, "decision_delay_min");
  check(std::isfinite(decision_delay_max) && decision_delay_max >= decision_delay_min,
        "decision_delay_max");
  check(std::isfinite(turn_rate) && turn_rate > 0.0, "turn_rate");
  check(std::isfinite(gaze_noise) && gaze_noise >= 0.0, "gaze_noise");
  check(std::isfinite(scan_dwell) && scan_dwell >= 0.0, "scan_dwell");
  check(std::isfinite(approach_slowdown) && approach_slowdown >= 0.0, "approach_slowdown");
  check(approach_min_fraction > 0.0 && approach_min_fraction <= 1.0, "approach_min_fraction");
}

std::vector<WalkerParams> default_cohort() {
  constexpr double pi = std::numbers::pi;
  // name, speed, delay range, turn rate, gaze noise, dwell
  const std::vector<WalkerParams> archetypes{
      {"brisk", 0.4, 3.0, 5.0, pi, 0.08, 0.6},
      {"steady", 0.325, 4.0, 6.0, 0.8 * pi, 0.10, 0.8},
      {"cautious", 0.225, 5.0, 8.0, 0.6 * pi, 0.12, 1.0},
      {"explorer", 0.3, 6.0, 9.0, pi, 0.15, 1.2},
      {"direct", 0.375, 3.0, 4.5, 1.2 * pi, 0.05, 0.5},
      {"wanderer", 0.275, 5.0, 8.0, 0.7 * pi, 0.20, 1.0},
  };
  // Each archetype also walks at a slower and a quicker pace, giving 180
  // trials per condition over 10 blocks. Walkers stay at or below 0.4 m/s,
  // under the column's 0.5 m/s short-move speed.
  struct Pace {
    const char* suffix;
    double speed;
    double delay;
  };
  constexpr Pace paces[] = {{"", 1.0, 1.0}, {"-slow", 0.85, 1.15}, {"-quick", 1.15, 0.85}};
  std::vector<WalkerParams> cohort;
  for (const Pace& pace : paces) {
    for (WalkerParams p : archetypes) {
      p.name += pace.suffix;
      p.walk_speed = std::min(0.4, p.walk_speed * pace.speed);
      p.decision_delay_min *= pace.delay;
      p.decision_delay_max *= pace.delay;
      cohort.push_back(std::move(p));
    }
  }
  return cohort;
}

Walker::Walker(const TrialSpec& spec, WalkerParams params, double contact_reach,
               std::uint64_t seed)
    : vois_(spec.vois), params_(std::move(params)), contact_reach_(contact_reach), rng_(seed) {
  params_.validate();
  if (vois_.empty()) throw std::invalid_argument("Walker: trial has no VOIs");
  state_.pose = spec.user_start;
  state_.pose.heading = normalize_angle(state_.pose.heading);
  state_.tracked = true;
  state_.time = 0.0;
  nominal_heading_ = state_.pose.heading;
  decision_delay_ = uniform(rng_, params_.decision_delay_min, params_.decision_delay_max);
  scan_order_.resize(vois_.size());
  std::iota(scan_order_.begin(), scan_order_.end(), 0);
  std::shuffle(scan_order_.begin(), scan_order_.end(), rng_);
  dwell_left_ = params_.scan_dwell;
}

double Walker::bearing_to(Vec2 p) const {
  const Vec2 d = p - state_.pose.position;
  return std::atan2(d.y, d.x);
}

double Walker::turn_toward(double bearing, double dt) {
  const double err = normalize_angle(bearing - nominal_heading_);
  const double max_turn = params_.turn_rate * dt;
  const double turn = std::clamp(err, -max_turn, max_turn);
  nominal_heading_ = normalize_angle(nominal_heading_ + turn);
  return std::abs(err - turn);
}

UserState Walker::step(double t, double dt) {
  const Voi& target = vois_.front();

  // Smooth gaze wander around the nominal heading.
  const double a = dt / kGazeTimeConstant;
  gaze_offset_ += -gaze_offset_ * a +
                  params_.gaze_noise * std::sqrt(2.0 * a) * unit_normal_(rng_);

  if (phase_ == Phase::scan && t >= decision_delay_) phase_ = Phase::turn;

  if (phase_ == Phase::scan) {
    const Voi& looked = vois_[scan_order_[scan_index_]];
    if (turn_toward(bearing_to(looked.position), dt) < kAligned) {
      dwell_left_ -= dt;
      if (dwell_left_ <= 0.0) {
        scan_index_ = (scan_index_ + 1) % scan_order_.size();
        dwell_left_ = params_.scan_dwell;
      }
    }
  } else if (phase_ == Phase::turn) {
    if (turn_toward(bearing_to(target.position), dt) < kAligned) phase_ = Phase::walk;
  } else if (phase_ == Phase::walk) {
    const double remaining =
        std::max(0.0, surface_distance(state_.pose.position, target) - contact_reach_);
    double fraction = 1.0;
    if (params_.approach_slowdown > 0.0) {
      fraction =
          std::clamp(remaining / params_.approach_slowdown, params_.approach_min_fraction, 1.0);
    }
    const double step = std::clamp(params_.walk_speed * fraction * dt, 0.0, remaining);
    const Vec2 to_target = target.position - state_.pose.position;
    if (step > 0.0) state_.pose.position += to_target / to_target.norm() * step;
    nominal_heading_ = bearing_to(target.position);
    if (surface_distance(state_.pose.position, target) - contact_reach_ <= 1e-12) {
      phase_ = Phase::contact;
    }
  }

  state_.time = t;
  state_.pose.heading = phase_ == Phase::contact
                            ? normalize_angle(nominal_heading_)
                            : normalize_angle(nominal_heading_ + gaze_offset_);
  return state_;
}

// Frame-by-frame statistics behind TrialMonitor.
struct MetricTracker {
  MetricTracker(const Arena& a, const SimConfig& c, Vec2 robot_start, std::size_t n_vois)
      : arena(a), config(c), prev_robot(robot_start), sticky_since(n_vois), was_sticky(n_vois) {}

  Arena arena;
  SimConfig config;
  Vec2 prev_robot;
  SafetyStats safety;
  double min_clearance = std::numeric_limits<double>::infinity();
  bool collision = false;
  double distance_sum = 0.0;
  std::vector<std::pair<double, double>> gap_history;  // (t, proxy-robot distance)
  std::vector<std::optional<double>> sticky_since;
  std::vector<bool> was_sticky;

  void observe(const Frame& f, bool have_user) {
    ++safety.frames;
    if (have_user) {
      const double proxy_dist = distance(f.proxy.position, f.obstacle.center);
      const double robot_dist = distance(f.robot.position, f.obstacle.center);
      safety.max_proxy_penetration =
          std::max(safety.max_proxy_penetration, f.obstacle.radius - proxy_dist);
      safety.max_robot_intrusion =
          std::max(safety.max_robot_intrusion, f.obstacle.radius - robot_dist);
      if (proxy_dist < f.obstacle.radius - 1e-9) collision = true;
      if (f.user.tracked) {
        min_clearance = std::min(min_clearance, distance(f.proxy.position, f.user.pose.position));
      }
    }
    const double cap = speed_cap(distance(f.proxy.position, prev_robot), config.speed);
    const bool fast = f.robot.status == RobotStatus::active && f.robot.velocity.norm() > cap + 1e-9;
    const bool jumped = distance(f.robot.position, prev_robot) > cap * config.dt + 1e-9;
    if (fast || jumped) ++safety.speed_cap_violations;
    if (!arena.within_margins(f.robot.position, 1e-12) ||
        !arena.within_margins(f.proxy.position, 1e-12)) {
      ++safety.margin_violations;
    }
    prev_robot = f.robot.position;

    const double gap = distance(f.proxy.position, f.robot.position);
    distance_sum += gap;
    gap_history.emplace_back(f.t, gap);

    if (f.user.tracked) {
      for (std::size_t i = 0; i < f.weights.entries.size() && i < was_sticky.size(); ++i) {
        const bool sticky = f.weights.entries[i].sticky >= 1.0;
        if (sticky && !was_sticky[i]) sticky_since[i] = f.t;
        was_sticky[i] = sticky;
      }
    }
  }
};


TrialMonitor::TrialMonitor(const Arena& arena, std::vector<Voi> vois, const SimConfig& config,
                           Vec2 robot_start, std::optional<std::string> target_id)
    : vois_(std::move(vois)),
      config_(config),
      tracker_(std::make_unique<MetricTracker>(arena, config_, robot_start, vois_.size())) {
  if (target_id) {
    for (std::size_t i = 0; i < vois_.size(); ++i) {
      if (vois_[i].id == *target_id) target_index_ = i;
    }
    if (!target_index_) {
      throw std::invalid_argument("unknown target '" + *target_id + "'");
    }
  }
}

TrialMonitor::~TrialMonitor() = default;
TrialMonitor::TrialMonitor(TrialMonitor&&) noexcept = default;
TrialMonitor& TrialMonitor::operator=(TrialMonitor&&) noexcept = default;

bool TrialMonitor::observe(const Frame& frame) {
  if (contacted_) return true;
  t_ = frame.t;
  have_user_ = have_user_ || frame.user.tracked;
  tracker_->observe(frame, have_user_);
  robot_ = frame.robot.position;
  if (frame.user.tracked) {
    for (std::size_t i = 0; i < vois_.size(); ++i) {
      if (target_index_ && i != *target_index_) continue;
      if (surface_distance(frame.user.pose.position, vois_[i]) <=
          config_.contact_reach + 1e-9) {
        contacted_ = i;
        break;
      }
    }
  }
  return contacted_.has_value();
}

double TrialMonitor::min_user_proxy_clearance() const { return tracker_->min_clearance; }

const SafetyStats& TrialMonitor::safety() const { return tracker_->safety; }

std::optional<std::pair<std::string, double>> TrialMonitor::last_detection() const {
  std::optional<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < vois_.size(); ++i) {
    const auto& since = tracker_->sticky_since[i];
    if (since && (!out || *since > out->second)) out.emplace(vois_[i].id, *since);
  }
  return out;
}

TrialResult TrialMonitor::result() const {
  const MetricTracker& tracker = *tracker_;
  TrialResult result;
  result.duration = t_;
  result.safety = tracker.safety;
  result.collision = tracker.collision;
  result.min_user_proxy_clearance = tracker.min_clearance;
  if (tracker.safety.frames > 0) {
    result.mean_proxy_robot_distance =
        tracker.distance_sum / static_cast<double>(tracker.safety.frames);
  }
  if (contacted_) {
    const Voi& voi = vois_[*contacted_];
    result.contacted_id = voi.id;
    result.distance_at_contact = distance(robot_, voi.physical_position());
    result.success = *result.distance_at_contact <= config_.success_distance;
    if (tracker.sticky_since[*contacted_]) {
      result.detection_time = t_ - *tracker.sticky_since[*contacted_];
    }
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& [ft, gap] : tracker.gap_history) {
      if (ft > t_ - 1.0 - 1e-9) {
        sum += gap;
        ++n;
      }
    }
    if (n > 0) result.final_second_proxy_robot_distance = sum / static_cast<double>(n);
  }
  return result;
}

TrialResult run_trial(const Arena& arena, std::span<const Voi> vois, Vec2 robot_start,
                      UserSource& source, const SimConfig& config,
                      const TrialOptions& options) {
  std::vector<Voi> scene(vois.begin(), vois.end());
  Simulator sim = options.initial_state
                      ? Simulator(arena, scene, config, *options.initial_state)
                      : Simulator(arena, scene, config, robot_start);
  TrialMonitor monitor(arena, std::move(scene), config, sim.robot().position, options.target_id);

  std::vector<Frame> frames;
  for (std::size_t k = 1;; ++k) {
    const double t = static_cast<double>(k) * config.dt;
    if (t > config.trial_timeout + 1e-9) break;
    const std::optional<UserState> user = source.next(t, config.dt);
    if (!user) break;
    if (source.estop() && !sim.robot().estop_latched) sim.latch_estop();
    if (!source.estop() && sim.robot().estop_latched) sim.release_estop();

    const Frame& frame = sim.step(*user);
    if (options.record_frames) frames.push_back(frame);
    if (monitor.observe(frame)) break;
  }
  TrialResult result = monitor.result();
  result.frames = std::move(frames);
  return result;
}

TrialResult run_trial(const TrialSpec& spec, const WalkerParams& walker, const Arena& arena,
                      const SimConfig& config, bool record_frames) {
  WalkerSource source(Walker(spec, walker, config.contact_reach, mix_seed(spec.seed, kWalkerSeedSalt)));
  TrialOptions options;
  options.record_frames = record_frames;
  options.target_id = spec.target().id;
  return run_trial(arena, spec.vois, spec.robot_start, source, config, options);
}

std::vector<Frame> replay(Simulator& sim, UserSource& source, double dt) {
  std::vector<Frame> frames;
  for (std::size_t k = 1;; ++k) {
    const std::optional<UserState> user = source.next(static_cast<double>(k) * dt, dt);
    if (!user) break;
    if (source.estop() && !sim.robot().estop_latched) sim.latch_estop();
    if (!source.estop() && sim.robot().estop_latched) sim.release_estop();
    frames.push_back(sim.step(*user));
  }
  return frames;
}

}  // namespace encounter
