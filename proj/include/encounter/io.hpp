#pragma once

// On-disk formats: JSON Lines traces, JSON scenarios and CSV result tables.
// Field names and their order are a documented contract (docs/formats.md).

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "encounter/geometry.hpp"
#include "encounter/simulation.hpp"
#include "encounter/sweep.hpp"
#include "encounter/trial.hpp"

namespace encounter {

inline constexpr int kTraceVersion = 1;
inline constexpr std::string_view kScenarioFormat = "encounter-scenario";
inline constexpr int kScenarioVersion = 1;
inline constexpr std::string_view kSummaryFormat = "encounter-summary/1";
inline constexpr std::string_view kTrialsFormat = "encounter-trials/1";

/// A file that does not parse or violates its schema. `line` is 1-based and
/// 0 when the whole document is at fault; `field` is a path like
/// `vois[1].prior` when one value is to blame.
class FormatError : public std::runtime_error {
 public:
  FormatError(std::string source, std::size_t line, std::string field, const std::string& what);

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string source_;
  std::size_t line_;
  std::string field_;
};

struct TraceFrame {
  double t = 0.0;
  Pose pose;
  bool tracked = true;
  std::optional<Vec2> proxy;
  std::optional<Vec2> robot;
  // Effective weight per VOI id, in scene order.
  std::optional<std::vector<std::pair<std::string, double>>> weights;
  bool estop = false;

  UserState user() const { return {pose, tracked, t}; }

  bool operator==(const TraceFrame&) const = default;
};

/// Trace record of a simulator frame, including proxy, robot and weights.
TraceFrame trace_frame(const Frame& frame, bool estop = false);

std::string format_trace_line(const TraceFrame& frame);
/// Parses one line; `line_no` only labels errors.
TraceFrame parse_trace_line(std::string_view line, std::size_t line_no = 0);

void save_trace(const std::filesystem::path& path, std::span<const TraceFrame> frames);
/// Rejects malformed lines and non-increasing t, naming the line.
std::vector<TraceFrame> load_trace(const std::filesystem::path& path);

/// Appends frames to a trace file as they happen.
class TraceWriter {
 public:
  explicit TraceWriter(const std::filesystem::path& path);
  /// Throws std::runtime_error when the write fails.
  void append(const TraceFrame& frame);
  std::size_t frames() const { return frames_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t frames_ = 0;
  std::optional<double> last_t_;
};

/// Replays recorded user samples, one per physics step.
class TraceSource : public UserSource {
 public:
  explicit TraceSource(std::vector<TraceFrame> frames) : frames_(std::move(frames)) {}
  std::optional<UserState> next(double t, double dt) override;
  bool estop() const override { return estop_; }

 private:
  std::vector<TraceFrame> frames_;
  std::size_t index_ = 0;
  bool estop_ = false;
};

struct Scenario {
  Arena arena;
  std::vector<Voi> vois;
  // Contact with this VOI ends a trial; any VOI when absent.
  std::optional<std::string> target;
  Pose user_start;
  Vec2 robot_start;
  SimConfig config;
  std::optional<WalkerParams> walker;
  // Dynamic state to resume from, written when a live session is recorded.
  std::optional<SimState> initial_state;

  /// Throws ValidationError naming the offending field.
  void validate() const;

  bool operator==(const Scenario&) const = default;
};

Scenario scenario_from_trial(const TrialSpec& spec, const Arena& arena, const SimConfig& config,
                             std::optional<WalkerParams> walker = std::nullopt);

/// Simulator at the scenario's start state.
Simulator make_simulator(const Scenario& scenario);

std::string scenario_to_json(const Scenario& scenario);
/// `source` only labels errors.
Scenario scenario_from_json(std::string_view text, const std::string& source = "scenario");
void save_scenario(const std::filesystem::path& path, const Scenario& scenario);
Scenario load_scenario(const std::filesystem::path& path);

/// One-line JSON for a trial result; infinite or absent values are null.
std::string trial_result_json(const TrialResult& result);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

std::string summary_csv(const SweepSummary& summary);
std::string trials_csv(const SweepSummary& summary);
/// Writes summary.csv and trials.csv into `dir`, creating it if needed.
void write_results(const SweepSummary& summary, const std::filesystem::path& dir);

/// Whole file as a string; throws std::runtime_error naming the path.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view text);

}  // namespace encounter
