#pragma once

// User-intention weights and the weighted-centroid command position.
//
// Each VOI's weight blends a distance score 1/(1+d) and an orientation score
// exp(cos(theta) - 1) with the parameter omega. Weights above the stickiness
// threshold snap to 1 and are then scaled by the VOI's prior. The column is
// commanded to the weight-averaged position of all VOIs.

#include <span>
#include <string>
#include <vector>

#include "encounter/geometry.hpp"

namespace encounter {

struct WeightEntry {
  std::string voi_id;
  double raw = 0.0;        // blended score, before stickiness
  double sticky = 0.0;     // after stickiness, before the prior
  double effective = 0.0;  // after the prior; drives the centroid

  bool operator==(const WeightEntry&) const = default;
};

struct WeightVector {
  std::vector<WeightEntry> entries;

  double total() const;
  const WeightEntry* find(const std::string& id) const;

  bool operator==(const WeightVector&) const = default;
};

struct CommandPosition {
  Vec2 target;
  bool degenerate = false;

  bool operator==(const CommandPosition&) const = default;
};

/// Below this total effective weight the centroid is undefined and the
/// previous command is held.
inline constexpr double kDegenerateWeight = 1e-6;

double distance_score(double d);

/// Angle between the heading ray and the VOI disc, 0 when the ray hits the
/// disc or the user stands inside it.
double angular_offset(const Pose& user, const Voi& voi);

double orientation_score(double theta);

double raw_weight(double d, double theta, double omega);

inline double apply_stickiness(double w, double threshold) { return w > threshold ? 1.0 : w; }

inline double apply_prior(double w, double prior) { return prior * w; }

/// Weights for every VOI, in input order. Throws on an empty list.
WeightVector compute_weights(const UserState& user, std::span<const Voi> vois,
                             const SimConfig& config);

/// Weighted centroid of the VOIs' physical positions, clamped to the arena.
/// Holds `previous` (flagged degenerate) when the total weight vanishes.
CommandPosition command_position(const WeightVector& weights, std::span<const Voi> vois,
                                 const CommandPosition& previous, const Arena& arena);

}  // namespace encounter
