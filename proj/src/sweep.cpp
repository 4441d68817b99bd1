#include "encounter/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <thread>

#include "encounter/seed.hpp"

namespace encounter {

std::uint64_t trial_seed(std::uint64_t base_seed, int block, int condition, std::size_t persona) {
  std::uint64_t h = splitmix64(static_cast<std::uint64_t>(block));
  h = splitmix64(h ^ static_cast<std::uint64_t>(condition));
  h = splitmix64(h ^ static_cast<std::uint64_t>(persona));
  return base_seed ^ h;
}

std::optional<MeanCi> summarize_or_nan(const std::vector<double>& samples) {
  if (samples.empty()) return std::nullopt;
  if (samples.size() == 1) return MeanCi{samples.front(), std::numeric_limits<double>::quiet_NaN()};
  return summarize(samples);
}

std::vector<double> omega_grid(double start, double end, double step) {
  if (!(step > 0.0) || !std::isfinite(start) || !std::isfinite(end) || end < start) {
    throw std::invalid_argument("omega grid needs start <= end and step > 0");
  }
  std::vector<double> out;
  for (long i = 0;; ++i) {
    // Round to 1e-12 so 0.1-style steps print cleanly.
    const double v = std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12;
    if (v > end + 1e-9) break;
    out.push_back(v);
  }
  return out;
}

namespace {

struct Task {
  double omega;
  int condition;
  int block;
  std::size_t persona;
};

TrialRow run_task(const SweepOptions& options, const Task& task) {
  SimConfig config = options.config;
  config.omega = task.omega;
  const std::uint64_t seed = trial_seed(options.base_seed, task.block, task.condition, task.persona);
  TrialSpec spec = generate_trial(seed, task.condition, options.arena);
  if (options.target_prior) assign_target_prior(spec, *options.target_prior);
  const WalkerParams& walker = options.personas[task.persona];
  const TrialResult r = run_trial(spec, walker, options.arena, config);

  TrialRow row;
  row.omega = task.omega;
  row.condition = task.condition;
  row.block = task.block;
  row.persona = walker.name;
  row.seed = seed;
  row.success = r.success;
  row.distance_at_contact = r.distance_at_contact;
  row.detection_time = r.detection_time;
  row.min_user_proxy_clearance = r.min_user_proxy_clearance;
  row.collision = r.collision;
  row.duration = r.duration;
  row.mean_proxy_robot_distance = r.mean_proxy_robot_distance;
  row.final_second_proxy_robot_distance = r.final_second_proxy_robot_distance;
  row.safety = r.safety;
  return row;
}

}  // namespace

SweepSummary run_sweep(const SweepOptions& options) {
  if (options.omegas.empty()) throw std::invalid_argument("run_sweep: empty omega grid");
  if (options.conditions.empty()) throw std::invalid_argument("run_sweep: no conditions");
  if (options.blocks < 1) throw std::invalid_argument("run_sweep: blocks must be >= 1");
  if (options.personas.empty()) throw std::invalid_argument("run_sweep: no walker personas");
  options.arena.validate();
  options.config.validate();
  for (double w : options.omegas) {
    if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("run_sweep: omega outside [0, 1]");
  }
  for (int c : options.conditions) {
    if (c < 0 || c > kMaxDistractors) throw std::invalid_argument("run_sweep: condition outside 0..4");
  }
  for (const auto& p : options.personas) p.validate();

  std::vector<Task> tasks;
  for (double w : options.omegas)
    for (int c : options.conditions)
      for (int b = 0; b < options.blocks; ++b)
        for (std::size_t p = 0; p < options.personas.size(); ++p) tasks.push_back({w, c, b, p});

  SweepSummary summary;
  summary.trials.resize(tasks.size());

  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(tasks.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size() && !failed; i = next++) {
      try {
        summary.trials[i] = run_task(options, tasks[i]);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::size_t i = 0;
  for (double w : options.omegas) {
    for (int c : options.conditions) {
      std::vector<double> success, contact, detection, gap;
      SummaryRow row;
      row.omega = w;
      row.condition = c;
      const std::size_t n = static_cast<std::size_t>(options.blocks) * options.personas.size();
      for (std::size_t k = 0; k < n; ++k, ++i) {
        const TrialRow& t = summary.trials[i];
        success.push_back(t.success ? 1.0 : 0.0);
        if (t.distance_at_contact) contact.push_back(*t.distance_at_contact);
        if (t.detection_time) detection.push_back(*t.detection_time);
        gap.push_back(t.mean_proxy_robot_distance);
        if (t.collision) ++row.collisions;
      }
      row.trials = n;
      row.success_rate = *summarize_or_nan(success);
      row.distance_at_contact = summarize_or_nan(contact);
      row.detection_time = summarize_or_nan(detection);
      row.proxy_robot_distance = summarize_or_nan(gap);
      summary.rows.push_back(row);
    }
  }
  return summary;
}

std::vector<OmegaChoice> best_omega_per_condition(const SweepSummary& summary) {
  std::map<int, const SummaryRow*> best;
  auto contact_mean = [](const SummaryRow& r) {
    return r.distance_at_contact ? r.distance_at_contact->mean
                                 : std::numeric_limits<double>::infinity();
  };
  for (const SummaryRow& r : summary.rows) {
    auto [it, inserted] = best.try_emplace(r.condition, &r);
    if (inserted) continue;
    const SummaryRow& b = *it->second;
    const double rs = r.success_rate.mean, bs = b.success_rate.mean;
    const bool better =
        rs > bs || (rs == bs && (contact_mean(r) < contact_mean(b) ||
                                 (contact_mean(r) == contact_mean(b) && r.omega < b.omega)));
    if (better) it->second = &r;
  }
  std::vector<OmegaChoice> out;
  for (const auto& [c, r] : best) out.push_back({c, r->omega, r->success_rate.mean});
  return out;
}

OmegaChoice best_average_omega(const SweepSummary& summary) {
  std::map<double, std::pair<double, int>> by_omega;
  for (const SummaryRow& r : summary.rows) {
    auto& [sum, n] = by_omega[r.omega];
    sum += r.success_rate.mean;
    ++n;
  }
  if (by_omega.empty()) throw std::invalid_argument("best_average_omega: empty summary");
  OmegaChoice best{-1, 0.0, -1.0};
  for (const auto& [w, acc] : by_omega) {
    const double mean = acc.first / acc.second;
    if (mean > best.success_rate) best = {-1, w, mean};
  }
  return best;
}

OmegaFit fit_omega(const SweepOptions& options, double coarse_step, double fine_step,
                   double fine_halfwidth) {
  if (!(fine_halfwidth >= 0.0)) throw std::invalid_argument("fit_omega: negative refinement window");
  OmegaFit fit;
  fit.coarse = omega_grid(0.0, 1.0, coarse_step);
  SweepOptions coarse = options;
  coarse.omegas = fit.coarse;
  const SweepSummary first = run_sweep(coarse);

  std::vector<double> centers{best_average_omega(first).omega};
  for (const OmegaChoice& c : best_omega_per_condition(first)) centers.push_back(c.omega);
  std::set<double> fine;
  for (double c : centers) {
    const double lo = std::max(0.0, c - fine_halfwidth);
    const double hi = std::min(1.0, c + fine_halfwidth);
    for (double w : omega_grid(lo, hi, fine_step)) {
      const bool known = std::any_of(fit.coarse.begin(), fit.coarse.end(),
                                     [&](double v) { return std::abs(v - w) < 1e-9; });
      if (!known) fine.insert(w);
    }
  }
  fit.refined.assign(fine.begin(), fine.end());

  std::vector<double> all = fit.coarse;
  all.insert(all.end(), fit.refined.begin(), fit.refined.end());
  std::sort(all.begin(), all.end());
  SweepOptions full = options;
  full.omegas = all;
  // Seeds ignore omega, so rerunning the coarse values reproduces them exactly.
  fit.summary = run_sweep(full);
  fit.per_condition = best_omega_per_condition(fit.summary);
  fit.average = best_average_omega(fit.summary);
  return fit;
}

}  // namespace encounter
