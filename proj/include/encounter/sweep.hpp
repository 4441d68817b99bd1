#pragma once

// Full-factorial omega x condition x block x persona experiments.
//
// Trial seeds depend on (base_seed, block, condition, persona) only, so every
// omega value, and the prior-augmented variant, replays the same layouts and
// walkers. Results are reduced in key order, never completion order.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "encounter/geometry.hpp"
#include "encounter/stats.hpp"
#include "encounter/trial.hpp"

namespace encounter {

struct SweepOptions {
  std::vector<double> omegas;
  std::vector<int> conditions{0, 1, 2, 3, 4};
  int blocks = 10;
  std::uint64_t base_seed = 0;
  std::vector<WalkerParams> personas = default_cohort();
  // Prior on the target; distractors share the remainder.
  std::optional<double> target_prior;
  Arena arena;
  SimConfig config;
  unsigned threads = 0;  // 0: one per hardware thread
};

struct TrialRow {
  double omega = 0.0;
  int condition = 0;
  int block = 0;
  std::string persona;
  std::uint64_t seed = 0;
  bool success = false;
  std::optional<double> distance_at_contact;
  std::optional<double> detection_time;
  double min_user_proxy_clearance = 0.0;
  bool collision = false;
  double duration = 0.0;
  double mean_proxy_robot_distance = 0.0;
  std::optional<double> final_second_proxy_robot_distance;
  SafetyStats safety;
};

struct SummaryRow {
  double omega = 0.0;
  int condition = 0;
  std::size_t trials = 0;
  MeanCi success_rate;
  std::optional<MeanCi> distance_at_contact;
  std::optional<MeanCi> detection_time;
  std::optional<MeanCi> proxy_robot_distance;
  std::size_t collisions = 0;
};

struct SweepSummary {
  std::vector<SummaryRow> rows;  // (omega, condition) order
  std::vector<TrialRow> trials;  // (omega, condition, block, persona) order
};

/// Seed of one trial; independent of omega.
std::uint64_t trial_seed(std::uint64_t base_seed, int block, int condition, std::size_t persona);

SweepSummary run_sweep(const SweepOptions& options);

/// Mean and 95% t half-width; the half-width is NaN for fewer than 2 samples.
std::optional<MeanCi> summarize_or_nan(const std::vector<double>& samples);

struct OmegaChoice {
  int condition = 0;
  double omega = 0.0;
  double success_rate = 0.0;
};

/// Highest success rate per condition. Ties go to the lower mean distance
/// at contact, then to the smaller omega.
std::vector<OmegaChoice> best_omega_per_condition(const SweepSummary& summary);

/// Omega with the best success rate averaged over all conditions.
OmegaChoice best_average_omega(const SweepSummary& summary);

struct OmegaFit {
  SweepSummary summary;                // every evaluated omega, full factorial
  std::vector<OmegaChoice> per_condition;
  OmegaChoice average;                 // best mean success over conditions
  std::vector<double> coarse;
  std::vector<double> refined;         // omegas added by the second phase
};

/// Coarse grid at `coarse_step`, then a `fine_step` grid within
/// +-`fine_halfwidth` of every coarse argmax (per condition and on average).
/// `options.omegas` is ignored.
OmegaFit fit_omega(const SweepOptions& options, double coarse_step = 0.25,
                   double fine_step = 0.025, double fine_halfwidth = 0.125);

/// Inclusive grid start, start+step, ... up to end (within 1e-9).
std::vector<double> omega_grid(double start, double end, double step);

}  // namespace encounter
