// Acceptance run: one PASS/FAIL line per headline criterion, plus INFO lines
// with the numbers behind them. Exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "encounter/intention.hpp"
#include "encounter/io.hpp"
#include "encounter/proxy.hpp"
#include "encounter/seed.hpp"
#include "encounter/session.hpp"
#include "encounter/sweep.hpp"

using namespace encounter;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kDefaultOmega = 0.175;
constexpr std::uint64_t kBaseSeed = 0;

int failures = 0;

void verdict(const char* name, bool pass, const std::string& detail) {
  std::printf("%s %-22s %s\n", pass ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

template <class... Args>
void info(const char* f, Args... args) {
  std::printf("INFO %s\n", fmt(f, args...).c_str());
  std::fflush(stdout);
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

const SummaryRow& row_at(const SweepSummary& s, double omega, int condition) {
  for (const SummaryRow& r : s.rows) {
    if (std::abs(r.omega - omega) < 1e-12 && r.condition == condition) return r;
  }
  throw std::runtime_error("missing summary row");
}

SweepOptions cohort_sweep() {
  SweepOptions o;
  o.conditions = {0, 1, 2, 3, 4};
  o.blocks = 10;
  o.base_seed = kBaseSeed;
  return o;
}

// ---- formula exactness ------------------------------------------------------

void formula_exactness() {
  const auto start = Clock::now();
  using std::numbers::pi;
  // Closed forms written out here, independent of the library.
  auto ds = [](double d) { return 1.0 / (1.0 + d); };
  auto os = [](double t) { return std::exp(std::cos(t) - 1.0); };
  auto w = [&](double d, double t, double om) { return om * ds(d) + (1.0 - om) * os(t); };

  int cases = 0;
  double worst = 0.0;
  auto check = [&](double got, double want) {
    ++cases;
    worst = std::max(worst, std::abs(got - want));
  };

  for (double d : {0.0, 1.0, 3.0, 0.37, 2.5}) check(distance_score(d), ds(d));
  check(distance_score(0.0), 1.0);
  check(distance_score(1.0), 0.5);
  check(distance_score(3.0), 0.25);
  for (double t : {0.0, pi / 2, pi, 0.3, 2.0}) check(orientation_score(t), os(t));
  check(orientation_score(0.0), 1.0);
  check(orientation_score(pi / 2), std::exp(-1.0));
  check(orientation_score(pi), std::exp(-2.0));

  const Voi east{"e", {2.0, 0.0}, 0.05, 1.0, {}};
  check(angular_offset({{0.0, 0.0}, 0.0}, east), 0.0);
  check(angular_offset({{0.0, 0.0}, pi / 2}, east), pi / 2 - std::asin(0.025));
  check(angular_offset({{0.0, 0.0}, 0.0}, Voi{"i", {0.0, 0.01}, 0.05, 1.0, {}}), 0.0);

  for (double om : {0.0, 0.175, 1.0}) check(raw_weight(0.0, 0.0, om), 1.0);
  check(raw_weight(1.0, pi / 2, 0.175), 0.175 * 0.5 + 0.825 * std::exp(-1.0));
  check(raw_weight(1.0, pi / 2, 1.0), 0.5);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ud(0.0, 5.0), ut(0.0, pi), uo(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const double d = ud(rng), t = ut(rng), om = uo(rng);
    check(raw_weight(d, t, om), w(d, t, om));
  }

  check(apply_stickiness(0.81, 0.8), 1.0);
  check(apply_stickiness(0.8, 0.8), 0.8);
  check(apply_stickiness(0.3, 0.8), 0.3);
  check(apply_prior(0.6, 1.0), 0.6);
  check(apply_prior(1.0, 0.75), 0.75);
  check(apply_prior(0.4, 0.0), 0.0);

  // Two-VOI scene worked by hand: A is sticky, B from d = 1.95 and the
  // tangent-corrected bearing.
  SimConfig config;
  const std::vector<Voi> ab{{"A", {1.0, 0.0}, 0.05, 1.0, {}}, {"B", {0.0, 2.0}, 0.05, 1.0, {}}};
  const WeightVector wv = compute_weights({{{0.0, 0.0}, 0.0}, true, 0.0}, ab, config);
  check(wv.entries[0].effective, 1.0);
  check(wv.entries[1].effective, w(1.95, pi / 2 - std::asin(0.05 / 2.0), 0.175));

  const Arena open{4.0, 4.0, 0.0};
  auto weights = [](double a, double b) {
    WeightVector v;
    v.entries = {{"a", a, a, a}, {"b", b, b, b}};
    return v;
  };
  const std::vector<Voi> two{{"a", {0.0, 0.0}, 0.05, 1.0, {}}, {"b", {2.0, 0.0}, 0.05, 1.0, {}}};
  const std::vector<Voi> wide{{"a", {0.0, 0.0}, 0.05, 1.0, {}}, {"b", {4.0, 0.0}, 0.05, 1.0, {}}};
  const CommandPosition prev{{3.0, 3.0}, false};
  CommandPosition c = command_position(weights(0.5, 0.5), two, prev, open);
  check(c.target.x, 1.0);
  check(c.target.y, 0.0);
  c = command_position(weights(1.0, 0.0), two, prev, open);
  check(c.target.x, 0.0);
  c = command_position(weights(0.2, 0.6), wide, prev, open);
  check(c.target.x, 3.0);

  const double elapsed = seconds_since(start);
  verdict("formula-exactness", cases >= 20 && worst <= 1e-9 && elapsed < 1.0,
          fmt("%d cases, max |error| %.2e (limit 1e-9), %.3f s (limit 1 s)", cases, worst, elapsed));
}

// ---- single VOI ---------------------------------------------------------------

std::vector<TrialResult> single_voi() {
  const auto start = Clock::now();
  const Arena arena;
  const SimConfig config;
  const auto cohort = default_cohort();
  std::vector<TrialResult> results;
  int successes = 0;
  double fastest = 0.0;
  for (int i = 0; i < 300; ++i) {
    const std::size_t persona = static_cast<std::size_t>(i) % cohort.size();
    const int block = i / static_cast<int>(cohort.size());
    const std::uint64_t seed = trial_seed(kBaseSeed + 1000, block, 0, persona);
    fastest = std::max(fastest, cohort[persona].walk_speed);
    results.push_back(run_trial(generate_trial(seed, 0, arena), cohort[persona], arena, config));
    if (results.back().success) ++successes;
  }
  const double rate = successes / 300.0;
  const double elapsed = seconds_since(start);
  verdict("single-voi-success", rate >= 0.99 && elapsed < 120.0 && fastest <= 1.0,
          fmt("%d/300 = %.3f (limit >= 0.99), walkers <= %.2f m/s, %.1f s (limit 120 s)", successes,
              rate, fastest, elapsed));
  return results;
}

// ---- omega fit and what depends on it ----------------------------------------

struct SweepRun {
  OmegaFit fit;
  double seconds = 0.0;
};

SweepRun omega_fit() {
  const auto start = Clock::now();
  SweepRun run{fit_omega(cohort_sweep()), 0.0};
  run.seconds = seconds_since(start);
  const OmegaFit& fit = run.fit;

  bool interior = true;
  std::string picks;
  for (const OmegaChoice& c : fit.per_condition) {
    picks += fmt(" c%d=%s", c.condition, format_number(c.omega).c_str());
    if (c.condition >= 2 && (c.omega <= 0.0 || c.omega >= 1.0)) interior = false;
  }
  const std::size_t trials = fit.summary.trials.size();
  verdict("omega-sweep", interior && run.seconds < 1800.0,
          fmt("argmax%s; interior at >=2 distractors: %s; %zu omegas, %zu trials, %.1f s (limit 1800 s)",
              picks.c_str(), interior ? "yes" : "no", fit.coarse.size() + fit.refined.size(), trials,
              run.seconds));

  // How flat the curve is: spread of success over omega per condition.
  for (int cond = 0; cond <= 4; ++cond) {
    double lo = 1.0, hi = 0.0;
    for (const SummaryRow& r : fit.summary.rows) {
      if (r.condition != cond) continue;
      lo = std::min(lo, r.success_rate.mean);
      hi = std::max(hi, r.success_rate.mean);
    }
    const SummaryRow* best = nullptr;
    for (const OmegaChoice& c : fit.per_condition) {
      if (c.condition == cond) best = &row_at(fit.summary, c.omega, cond);
    }
    info("omega spread c%d: success %.3f..%.3f across omega; argmax %.3f +- %.3f", cond, lo, hi,
         best->success_rate.mean, best->success_rate.half_width);
  }
  info("best average omega %s (mean success %.3f); default config value %.3f reported below",
       format_number(fit.average.omega).c_str(), fit.average.success_rate, kDefaultOmega);
  return run;
}

void default_omega(const SweepSummary& fitted, double fitted_omega) {
  SweepOptions o = cohort_sweep();
  o.omegas = {kDefaultOmega};
  const SweepSummary s = run_sweep(o);
  double mean = 0.0;
  std::string line;
  for (const SummaryRow& r : s.rows) {
    mean += r.success_rate.mean / static_cast<double>(s.rows.size());
    line += fmt(" c%d=%.3f", r.condition, r.success_rate.mean);
  }
  double fitted_mean = 0.0;
  for (int c = 0; c <= 4; ++c) fitted_mean += row_at(fitted, fitted_omega, c).success_rate.mean / 5.0;
  info("omega=%.3f (config default):%s, mean %.3f; fitted omega=%s mean %.3f", kDefaultOmega, line.c_str(),
       mean, format_number(fitted_omega).c_str(), fitted_mean);
}

void monotonicity(const SweepSummary& s, double omega) {
  bool ok = true;
  std::string line;
  for (int c = 0; c <= 4; ++c) {
    const SummaryRow& r = row_at(s, omega, c);
    line += fmt(" c%d=%.3f+-%.3f", c, r.success_rate.mean, r.success_rate.half_width);
    if (c == 0) continue;
    const SummaryRow& prev = row_at(s, omega, c - 1);
    const bool down = r.success_rate.mean <= prev.success_rate.mean;
    const bool overlap = r.success_rate.mean - r.success_rate.half_width <=
                         prev.success_rate.mean + prev.success_rate.half_width;
    if (!down && !overlap) ok = false;
  }
  verdict("distractor-monotonic", ok,
          fmt("omega=%s:%s (rises allowed within 95%% CI overlap)", format_number(omega).c_str(),
              line.c_str()));
}

SweepSummary prior_uplift(const SweepSummary& base, double omega) {
  SweepOptions o = cohort_sweep();
  o.omegas = {omega};
  o.target_prior = 0.75;
  const SweepSummary with = run_sweep(o);

  bool never_lower = true;
  bool uplift = true;
  std::string line;
  for (int c = 0; c <= 4; ++c) {
    const double b = row_at(base, omega, c).success_rate.mean;
    const double p = row_at(with, omega, c).success_rate.mean;
    line += fmt(" c%d %.3f->%.3f", c, b, p);
    if (p < b) never_lower = false;
    if (c >= 3 && p - b < 0.05) uplift = false;
  }
  // Per-trial pairs, for context only.
  std::map<std::tuple<int, int, std::string>, bool> base_success;
  for (const TrialRow& t : base.trials) {
    if (std::abs(t.omega - omega) < 1e-12) base_success[{t.condition, t.block, t.persona}] = t.success;
  }
  int lost = 0, gained = 0;
  for (const TrialRow& t : with.trials) {
    const bool b = base_success.at({t.condition, t.block, t.persona});
    if (b && !t.success) ++lost;
    if (!b && t.success) ++gained;
  }
  verdict("prior-uplift", never_lower && uplift,
          fmt("prior 0.75 at omega=%s:%s; no condition lower: %s; +5 pp at 3 and 4: %s",
              format_number(omega).c_str(), line.c_str(), never_lower ? "yes" : "no",
              uplift ? "yes" : "no"));
  info("prior pairs: %d trials gained success, %d lost", gained, lost);
  return with;
}

// ---- safety -------------------------------------------------------------------

// Drops tracking for a window partway through a walker trial.
class DropoutSource : public UserSource {
 public:
  DropoutSource(Walker walker, double from, double to)
      : walker_(std::move(walker)), from_(from), to_(to) {}
  std::optional<UserState> next(double t, double dt) override {
    UserState u = walker_.step(t, dt);
    if (t >= from_ && t < to_) u.tracked = false;
    return u;
  }

 private:
  Walker walker_;
  double from_, to_;
};

// Worst delay between the last tracked sample and the halt, over seeded
// dropouts of 0.6-1.5 s.
double tracking_loss_latency(int runs) {
  const Arena arena;
  const SimConfig config;
  const auto cohort = default_cohort();
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> when(1.0, 9.0), length(0.6, 1.5);
  double worst = 0.0;
  for (int i = 0; i < runs; ++i) {
    const TrialSpec spec = generate_trial(trial_seed(77, i, i % 5, 0), i % 5, arena);
    const double from = when(rng);
    const double to = from + length(rng);
    DropoutSource source(Walker(spec, cohort[static_cast<std::size_t>(i) % cohort.size()],
                                config.contact_reach, mix_seed(spec.seed, kWalkerSeedSalt)),
                         from, to);
    TrialOptions options;
    options.record_frames = true;
    options.target_id = spec.target().id;
    const TrialResult r = run_trial(arena, spec.vois, spec.robot_start, source, config, options);
    std::optional<double> last_tracked, halted;
    for (const Frame& f : r.frames) {
      if (f.t >= from && !halted) {
        if (f.robot.status == RobotStatus::halted_tracking_loss) halted = f.t;
      }
      if (f.user.tracked && f.t < from) last_tracked = f.t;
    }
    if (r.frames.empty() || r.frames.back().t < to) continue;  // touched before the dropout ended
    if (!halted || !last_tracked) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, *halted - *last_tracked);
  }
  return worst;
}

void safety(const std::vector<const std::vector<TrialRow>*>& sweeps,
            const std::vector<TrialResult>& singles) {
  std::size_t trials = 0, speed = 0, margin = 0, collisions = 0;
  double penetration = 0.0, intrusion = 0.0;
  std::size_t intruding = 0;
  const double one_frame = SimConfig{}.speed.slow_speed * SimConfig{}.dt;
  auto add = [&](const SafetyStats& s, bool collision) {
    ++trials;
    speed += s.speed_cap_violations;
    margin += s.margin_violations;
    penetration = std::max(penetration, s.max_proxy_penetration);
    intrusion = std::max(intrusion, s.max_robot_intrusion);
    if (s.max_robot_intrusion > one_frame) ++intruding;
    if (collision) ++collisions;
  };
  for (const auto* rows : sweeps)
    for (const TrialRow& t : *rows) add(t.safety, t.collision);
  for (const TrialResult& r : singles) add(r.safety, r.collision);

  const double latency = tracking_loss_latency(100);
  const double dt = SimConfig{}.dt;
  const bool ok = penetration <= 1e-9 && collisions == 0 && speed == 0 && margin == 0 &&
                  latency <= 0.5 + dt + 1e-9;
  verdict("safety", ok,
          fmt("%zu trials: max proxy penetration %.1e m (limit 1e-9), %zu speed-cap and %zu margin "
              "violations, tracking-loss halt after %.3f s (limit %.3f s)",
              trials, penetration, speed, margin, latency, 0.5 + dt));
  info("robot column vs user obstacle: max intrusion %.4f m; %zu of %zu trials beyond one frame "
       "of motion (%.4f m)",
       intrusion, intruding, trials, one_frame);
}

void tracking_gap(const std::vector<const std::vector<TrialRow>*>& sweeps) {
  double sum = 0.0, worst = 0.0;
  std::size_t n = 0;
  for (const auto* rows : sweeps) {
    for (const TrialRow& t : *rows) {
      if (!t.success || !t.final_second_proxy_robot_distance) continue;
      sum += *t.final_second_proxy_robot_distance;
      worst = std::max(worst, *t.final_second_proxy_robot_distance);
      ++n;
    }
  }
  const double mean = n ? sum / static_cast<double>(n) : std::numeric_limits<double>::infinity();
  verdict("proxy-robot-tracking", n > 0 && mean <= 0.02,
          fmt("mean robot-proxy distance in the final second over %zu successful trials %.4f m "
              "(limit 0.02 m), worst trial %.4f m",
              n, mean, worst));
}

void detection_curve(const SweepSummary& s, double omega) {
  // Failure rate against detection time, trials with distractors only.
  const double edges[] = {0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 1e9};
  std::string line;
  for (std::size_t b = 0; b + 1 < std::size(edges); ++b) {
    int n = 0, failed = 0;
    for (const TrialRow& t : s.trials) {
      if (std::abs(t.omega - omega) > 1e-12 || t.condition == 0 || !t.detection_time) continue;
      if (*t.detection_time < edges[b] || *t.detection_time >= edges[b + 1]) continue;
      ++n;
      if (!t.success) ++failed;
    }
    line += edges[b + 1] > 1e8 ? fmt(" >=%.0fs:", edges[b]) : fmt(" %.0f-%.0fs:", edges[b], edges[b + 1]);
    line += n ? fmt("%.2f(n=%d)", static_cast<double>(failed) / n, n) : std::string("-");
  }
  int undetected = 0;
  for (const TrialRow& t : s.trials) {
    if (std::abs(t.omega - omega) < 1e-12 && t.condition > 0 && !t.detection_time) ++undetected;
  }
  info("failure rate by detection time at omega=%s:%s; %d trials with no detection",
       format_number(omega).c_str(), line.c_str(), undetected);
}

// ---- determinism -------------------------------------------------------------

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / (name + "-" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

double dense_oracle_worst(int cases) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Arena arena;
  double worst = 0.0;
  auto run = [&](ProxyState p, const CommandPosition& cmd, const ObstacleState& o, const SimConfig& c) {
    const auto steps = static_cast<long>(std::llround(5.0 / c.dt));
    for (long i = 0; i < steps; ++i) p = step_proxy(p, cmd, o, arena, c);
    return p;
  };
  for (int i = 0; i < cases; ++i) {
    const Vec2 user{1.4 + 1.2 * unit(rng), 1.4 + 1.2 * unit(rng)};
    const ObstacleState o{user, 0.45, 0.30};
    const double a = 2.0 * std::numbers::pi * unit(rng);
    const double side = unit(rng) < 0.5 ? -1.0 : 1.0;
    const double skew = side * (0.05 + 0.45 * unit(rng));
    const Vec2 start = user + direction(a) * (0.46 + 0.2 * unit(rng));
    const Vec2 goal = clamp_to_arena(
        user + direction(a + std::numbers::pi + skew) * (0.8 + 0.4 * unit(rng)), arena);
    SimConfig coarse, dense;
    dense.dt = coarse.dt / 100.0;
    const ProxyState p1 = run({start, {}}, {goal, false}, o, coarse);
    const ProxyState p2 = run({start, {}}, {goal, false}, o, dense);
    worst = std::max(worst, distance(p1.position, p2.position));
  }
  return worst;
}

void determinism() {
  TempDir dir("encounter-acceptance-sweep");
  SweepOptions o = cohort_sweep();
  o.omegas = omega_grid(0.0, 1.0, 0.25);
  write_results(run_sweep(o), dir.path / "a");
  o.threads = 1;
  write_results(run_sweep(o), dir.path / "b");
  bool same = true;
  for (const char* f : {"summary.csv", "trials.csv"}) {
    same = same && read_file(dir.path / "a" / f) == read_file(dir.path / "b" / f);
  }
  const double worst = dense_oracle_worst(50);
  verdict("determinism", same && worst <= 1e-3,
          fmt("repeated sweep files byte-identical: %s; dense dt/100 proxy reference, 50 detours: "
              "max final gap %.2e m (limit 1e-3)",
              same ? "yes" : "no", worst));
}

// ---- round trip --------------------------------------------------------------

void round_trip() {
  TempDir dir("encounter-acceptance-replay");

  // Batch trace: every frame of a walker trial survives save and load.
  const Arena arena;
  const TrialSpec spec = generate_trial(5, 3, arena);
  const TrialResult r = run_trial(spec, WalkerParams{}, arena, SimConfig{}, true);
  std::vector<TraceFrame> frames;
  for (const Frame& f : r.frames) frames.push_back(trace_frame(f));
  save_trace(dir.path / "batch.jsonl", frames);
  const bool trace_ok = load_trace(dir.path / "batch.jsonl") == frames;

  // Live sessions with steering, dropouts and e-stops, replayed in batch.
  int equivalent = 0;
  std::size_t compared = 0;
  for (std::uint64_t k = 1; k <= 10; ++k) {
    Session s(scenario_from_trial(generate_trial(500 + k, static_cast<int>(k % 5), arena), arena,
                                  SimConfig{}),
              dir.path);
    std::mt19937_64 rng(k);
    std::uniform_real_distribution<double> speed(-0.4, 0.4), unit(0.0, 1.0);
    auto send = [&](const std::string& text) {
      if (s.submit(text)) throw std::runtime_error("rejected: " + text);
    };
    auto steer = [&] {
      send(fmt(R"({"v":1,"type":"steer","vx":%.17g,"vy":%.17g,"heading_rate":%.17g})", speed(rng),
               speed(rng), 2.0 * speed(rng)));
    };
    steer();
    for (int i = 0; i < 50; ++i) s.step();
    send(R"({"v":1,"type":"record_start"})");
    std::vector<Frame> live;
    bool lost = false, stopped = false;
    for (int i = 0; i < 1200; ++i) {
      if (i % 45 == 0) steer();
      const double roll = unit(rng);
      if (roll < 0.004) {
        lost = !lost;
        send(lost ? R"({"v":1,"type":"set_tracking_lost","lost":true})"
                  : R"({"v":1,"type":"set_tracking_lost","lost":false})");
      } else if (roll < 0.007) {
        stopped = !stopped;
        send(stopped ? R"({"v":1,"type":"estop"})" : R"({"v":1,"type":"release_estop"})");
      }
      s.step();
      live.push_back(s.simulator().last());
    }
    const fs::path trace = *s.recording_path();
    send(R"({"v":1,"type":"record_stop"})");
    s.step();

    const TrialResult replay =
        replay_recording(load_scenario(snapshot_path(trace)), load_trace(trace), true);
    bool same = replay.frames.size() <= live.size() &&
                (replay.frames.size() == live.size() || replay.contacted_id.has_value());
    for (std::size_t i = 0; same && i < replay.frames.size(); ++i) {
      same = replay.frames[i].weights == live[i].weights && replay.frames[i].robot == live[i].robot;
    }
    compared += replay.frames.size();
    if (same) ++equivalent;
  }
  verdict("round-trip", trace_ok && equivalent == 10,
          fmt("trace save/load identical: %s (%zu frames); live-record vs batch-replay identical "
              "weights and robot states: %d/10 sessions (%zu frames)",
              trace_ok ? "yes" : "no", frames.size(), equivalent, compared));
}

}  // namespace

int main() {
  try {
    const auto start = Clock::now();
    formula_exactness();
    const std::vector<TrialResult> singles = single_voi();

    const SweepRun fit = omega_fit();
    const double omega = fit.fit.average.omega;
    monotonicity(fit.fit.summary, omega);
    const SweepSummary with_prior = prior_uplift(fit.fit.summary, omega);
    default_omega(fit.fit.summary, omega);

    const std::vector<const std::vector<TrialRow>*> sweeps{&fit.fit.summary.trials, &with_prior.trials};
    safety(sweeps, singles);
    tracking_gap(sweeps);
    detection_curve(fit.fit.summary, omega);
    determinism();
    round_trip();
    info("total %.1f s", seconds_since(start));
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance aborted: %s\n", e.what());
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
