// encounter: batch trials, omega sweeps, scenario generation and the live
// server. Failures print one JSON object on stderr and exit nonzero.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "encounter/io.hpp"
#include "encounter/seed.hpp"
#include "encounter/server.hpp"
#include "encounter/session.hpp"
#include "encounter/sweep.hpp"

namespace fs = std::filesystem;
using namespace encounter;

namespace {

struct Failure {
  std::string message;
  std::string path;
  std::string field;
};

int report(const Failure& f, int code = 1) {
  nlohmann::ordered_json j{{"error", f.message}};
  if (!f.path.empty()) j["path"] = f.path;
  if (!f.field.empty()) j["field"] = f.field;
  std::cerr << j.dump() << '\n';
  return code;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t colon = text.find(':', start);
    const std::string piece = text.substr(start, colon - start);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(piece, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != piece.size()) {
      throw std::invalid_argument("--omegas expects start:end:step, got '" + text + "'");
    }
    parts.push_back(v);
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3) throw std::invalid_argument("--omegas expects start:end:step");
  return omega_grid(parts[0], parts[1], parts[2]);
}

const WalkerParams* find_persona(const std::vector<WalkerParams>& cohort, const std::string& name) {
  const auto it = std::find_if(cohort.begin(), cohort.end(),
                               [&](const WalkerParams& w) { return w.name == name; });
  return it == cohort.end() ? nullptr : &*it;
}

// ---- run --------------------------------------------------------------------

struct RunArgs {
  std::string scenario;
  std::string trace;
  std::string walker;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int cmd_run(const RunArgs& a) {
  const Scenario scenario = load_scenario(a.scenario);
  TrialResult result;
  if (!a.trace.empty()) {
    result = replay_recording(scenario, load_trace(a.trace), !a.out.empty());
  } else {
    WalkerParams walker = scenario.walker.value_or(WalkerParams{});
    if (!a.walker.empty()) {
      const auto cohort = default_cohort();
      const WalkerParams* p = a.walker == "default" ? &walker : find_persona(cohort, a.walker);
      if (!p) throw ValidationError("walker", "no persona named '" + a.walker + "'");
      walker = *p;
    }
    // The walker heads for vois.front(), so put the target there for it.
    TrialSpec spec;
    spec.seed = a.seed.value_or(scenario.config.rng_seed);
    spec.vois = scenario.vois;
    if (scenario.target) {
      std::stable_partition(spec.vois.begin(), spec.vois.end(),
                            [&](const Voi& v) { return v.id == *scenario.target; });
    }
    spec.n_distractors = static_cast<int>(spec.vois.size()) - 1;
    spec.user_start = scenario.user_start;
    spec.robot_start = scenario.robot_start;
    WalkerSource source(Walker(spec, walker, scenario.config.contact_reach,
                               mix_seed(spec.seed, kWalkerSeedSalt)));
    TrialOptions options;
    options.record_frames = !a.out.empty();
    options.target_id = scenario.target.value_or(spec.vois.front().id);
    options.initial_state = scenario.initial_state;
    result = run_trial(scenario.arena, scenario.vois, scenario.robot_start, source,
                       scenario.config, options);
  }
  if (!a.out.empty()) {
    TraceWriter writer(a.out);
    for (const Frame& f : result.frames) writer.append(trace_frame(f, f.robot.estop_latched));
  }
  std::cout << trial_result_json(result) << '\n';
  return 0;
}

// ---- sweep ------------------------------------------------------------------

struct SweepArgs {
  std::string omegas = "0:1:0.25";
  std::vector<int> conditions{0, 1, 2, 3, 4};
  int blocks = 10;
  std::uint64_t seed = 0;
  std::string out;
  std::optional<double> target_prior;
  unsigned threads = 0;
};

int cmd_sweep(const SweepArgs& a) {
  SweepOptions options;
  options.omegas = parse_grid(a.omegas);
  options.conditions = a.conditions;
  options.blocks = a.blocks;
  options.base_seed = a.seed;
  options.target_prior = a.target_prior;
  options.threads = a.threads;
  const SweepSummary summary = run_sweep(options);
  if (!a.out.empty()) write_results(summary, a.out);

  std::printf("%-9s %-7s %-8s %s\n", "condition", "omega", "trials", "success (95% CI)");
  for (const OmegaChoice& c : best_omega_per_condition(summary)) {
    const auto row = std::find_if(summary.rows.begin(), summary.rows.end(), [&](const SummaryRow& r) {
      return r.condition == c.condition && r.omega == c.omega;
    });
    std::printf("%-9d %-7s %-8zu %.3f +- %.3f\n", c.condition, format_number(c.omega).c_str(),
                row->trials, row->success_rate.mean, row->success_rate.half_width);
  }
  const OmegaChoice avg = best_average_omega(summary);
  std::printf("best average: omega=%s success=%.3f\n", format_number(avg.omega).c_str(),
              avg.success_rate);
  return 0;
}

// ---- gen --------------------------------------------------------------------

struct GenArgs {
  int n = 10;
  int distractors = 2;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_gen(const GenArgs& a) {
  if (a.n < 1) throw ValidationError("n", "must be >= 1");
  if (a.distractors < 0 || a.distractors > kMaxDistractors) {
    throw ValidationError("distractors", "must be in 0..4");
  }
  fs::create_directories(a.out);
  const Arena arena;
  for (int i = 0; i < a.n; ++i) {
    // Same layout as sweep block i, first persona.
    const std::uint64_t seed = trial_seed(a.seed, i, a.distractors, 0);
    SimConfig config;
    config.rng_seed = seed;
    const Scenario s = scenario_from_trial(generate_trial(seed, a.distractors, arena), arena, config);
    char name[32];
    std::snprintf(name, sizeof name, "scenario-%03d.json", i);
    save_scenario(fs::path(a.out) / name, s);
  }
  std::cout << a.n << " scenarios written to " << a.out << '\n';
  return 0;
}

// ---- serve ------------------------------------------------------------------

struct ServeArgs {
  std::string scenario;
  std::string address = "127.0.0.1";
  std::uint16_t port = 8080;
  std::string web = ENCOUNTER_WEB_DIR;
  std::string record;
  std::uint64_t seed = 0;
  int distractors = 2;
};

int cmd_serve(const ServeArgs& a) {
  Scenario scenario;
  if (!a.scenario.empty()) {
    scenario = load_scenario(a.scenario);
  } else {
    const Arena arena;
    scenario = scenario_from_trial(generate_trial(a.seed, a.distractors, arena), arena, SimConfig{});
  }
  ServerOptions options;
  options.address = a.address;
  options.port = a.port;
  if (!a.web.empty()) options.web_root = a.web;
  if (!a.record.empty()) {
    fs::create_directories(a.record);
    options.record_dir = a.record;
  }
  options.handle_signals = true;
  Server server(std::move(scenario), options);
  server.start();
  std::cout << "listening on http://" << a.address << ':' << server.port() << "/" << std::endl;
  server.wait();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Encountered-type haptic display simulator"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run one trial from a scenario, or replay a trace");
  run_cmd->add_option("scenario", run.scenario, "Scenario JSON file")->required();
  auto* trace_opt = run_cmd->add_option("--trace", run.trace, "Replay this JSONL trace");
  run_cmd->add_option("--walker", run.walker, "Walker persona (default: the scenario's)")
      ->excludes(trace_opt);
  run_cmd->add_option("--seed", run.seed, "Walker seed (default: config.rng_seed)");
  run_cmd->add_option("--out", run.out, "Write the frame trace here");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Full-factorial omega sweep over the walker cohort");
  sweep_cmd->add_option("--omegas", sweep.omegas, "Grid start:end:step")->capture_default_str();
  sweep_cmd->add_option("--conditions", sweep.conditions, "Distractor counts")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--blocks", sweep.blocks, "Blocks per condition")->capture_default_str();
  sweep_cmd->add_option("--seed", sweep.seed, "Base seed")->capture_default_str();
  sweep_cmd->add_option("--out", sweep.out, "Directory for summary.csv and trials.csv");
  sweep_cmd->add_option("--target-prior", sweep.target_prior, "Prior on the target VOI")
      ->check(CLI::Range(0.0, 1.0));
  sweep_cmd->add_option("--threads", sweep.threads, "Worker threads (0: all cores)");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Write generated trial layouts as scenario files");
  gen_cmd->add_option("--n", gen.n, "Number of scenarios")->capture_default_str();
  gen_cmd->add_option("--distractors", gen.distractors, "Distractors per layout")
      ->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Base seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Start the live WebSocket service");
  serve_cmd->add_option("--scenario", serve.scenario, "Scenario JSON (default: a generated layout)");
  serve_cmd->add_option("--address", serve.address, "Listen address")->capture_default_str();
  serve_cmd->add_option("--port", serve.port, "Listen port (0: any free port)")
      ->capture_default_str();
  serve_cmd->add_option("--web", serve.web, "Static asset directory")->capture_default_str();
  serve_cmd->add_option("--record", serve.record, "Directory for session recordings");
  serve_cmd->add_option("--seed", serve.seed, "Layout seed when no scenario is given");
  serve_cmd->add_option("--distractors", serve.distractors, "Distractors when no scenario is given")
      ->check(CLI::Range(0, kMaxDistractors));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report({e.what(), "", ""}, 2);
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*sweep_cmd) return cmd_sweep(sweep);
    if (*gen_cmd) return cmd_gen(gen);
    if (*serve_cmd) return cmd_serve(serve);
  } catch (const FormatError& e) {
    return report({e.what(), e.source(), e.field()});
  } catch (const ValidationError& e) {
    return report({e.what(), "", e.field()});
  } catch (const std::exception& e) {
    return report({e.what(), "", ""});
  }
  return 0;
}
