#include "encounter/intention.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace encounter {

double WeightVector::total() const {
  double sum = 0.0;
  for (const auto& e : entries) sum += e.effective;
  return sum;
}

const WeightEntry* WeightVector::find(const std::string& id) const {
  auto it = std::find_if(entries.begin(), entries.end(),
                         [&](const WeightEntry& e) { return e.voi_id == id; });
  return it == entries.end() ? nullptr : &*it;
}

double distance_score(double d) {
  if (!std::isfinite(d) || d < 0.0) {
    throw std::invalid_argument("distance_score: distance must be finite and >= 0");
  }
  return 1.0 / (1.0 + d);
}

double angular_offset(const Pose& user, const Voi& voi) {
  const Vec2 to_voi = voi.position - user.position;
  const double d = to_voi.norm();
  if (d <= voi.radius) return 0.0;
  const double bearing = std::atan2(to_voi.y, to_voi.x);
  const double alpha = std::abs(normalize_angle(bearing - user.heading));
  const double half_width = std::asin(voi.radius / d);
  return std::max(0.0, alpha - half_width);
}

double orientation_score(double theta) {
  if (!std::isfinite(theta) || theta < 0.0 || theta > std::numbers::pi) {
    throw std::invalid_argument("orientation_score: theta must be in [0, pi]");
  }
  return std::exp(std::cos(theta) - 1.0);
}

double raw_weight(double d, double theta, double omega) {
  if (!std::isfinite(omega) || omega < 0.0 || omega > 1.0) {
    throw std::invalid_argument("raw_weight: omega must be in [0, 1]");
  }
  return omega * distance_score(d) + (1.0 - omega) * orientation_score(theta);
}

WeightVector compute_weights(const UserState& user, std::span<const Voi> vois,
                             const SimConfig& config) {
  if (vois.empty()) throw std::invalid_argument("compute_weights: no VOIs");
  WeightVector out;
  out.entries.reserve(vois.size());
  for (const Voi& voi : vois) {
    const double d = surface_distance(user.pose.position, voi);
    const double theta = angular_offset(user.pose, voi);
    WeightEntry e{voi.id, raw_weight(d, theta, config.omega), 0.0, 0.0};
    e.sticky = apply_stickiness(e.raw, config.stickiness_threshold);
    e.effective = apply_prior(e.sticky, voi.prior);
    out.entries.push_back(std::move(e));
  }
  return out;
}

CommandPosition command_position(const WeightVector& weights, std::span<const Voi> vois,
                                 const CommandPosition& previous, const Arena& arena) {
  if (weights.entries.size() != vois.size()) {
    throw std::invalid_argument("command_position: weight and VOI counts differ");
  }
  Vec2 sum;
  double total = 0.0;
  for (std::size_t i = 0; i < vois.size(); ++i) {
    const WeightEntry& e = weights.entries[i];
    if (e.voi_id != vois[i].id) {
      // Allow any order, but every id must be present exactly once.
      const WeightEntry* match = weights.find(vois[i].id);
      if (match == nullptr) {
        throw std::invalid_argument("command_position: no weight for VOI '" + vois[i].id + "'");
      }
      sum += vois[i].physical_position() * match->effective;
      total += match->effective;
      continue;
    }
    sum += vois[i].physical_position() * e.effective;
    total += e.effective;
  }
  if (total < kDegenerateWeight) return {previous.target, true};
  return {clamp_to_arena(sum / total, arena), false};
}

}  // namespace encounter
