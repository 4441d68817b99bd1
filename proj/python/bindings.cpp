#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>

#include "encounter/intention.hpp"
#include "encounter/io.hpp"
#include "encounter/proxy.hpp"
#include "encounter/robot.hpp"
#include "encounter/sweep.hpp"
#include "encounter/trial.hpp"

namespace py = pybind11;
using namespace encounter;

namespace {

std::string fmt_vec(Vec2 v) { return "Vec2(" + format_number(v.x) + ", " + format_number(v.y) + ")"; }

SweepOptions sweep_options(std::vector<double> omegas, std::vector<int> conditions, int blocks,
                           std::uint64_t base_seed, std::optional<double> target_prior,
                           const SimConfig& config, unsigned threads) {
  SweepOptions o;
  o.omegas = std::move(omegas);
  o.conditions = std::move(conditions);
  o.blocks = blocks;
  o.base_seed = base_seed;
  o.target_prior = target_prior;
  o.config = config;
  o.threads = threads;
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Encountered-type haptic display simulator";

  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

  py::class_<Vec2>(m, "Vec2")
      .def(py::init<>())
      .def(py::init<double, double>(), py::arg("x"), py::arg("y"))
      .def_readwrite("x", &Vec2::x)
      .def_readwrite("y", &Vec2::y)
      .def("norm", &Vec2::norm)
      .def(py::self == py::self)
      .def("__repr__", &fmt_vec);

  py::class_<Pose>(m, "Pose")
      .def(py::init<>())
      .def(py::init([](Vec2 p, double h) { return Pose{p, h}; }), py::arg("position"),
           py::arg("heading") = 0.0)
      .def_readwrite("position", &Pose::position)
      .def_readwrite("heading", &Pose::heading);

  py::class_<Arena>(m, "Arena")
      .def(py::init<>())
      .def(py::init([](double w, double l, double margin) { return Arena{w, l, margin}; }),
           py::arg("width"), py::arg("length"), py::arg("safety_margin") = 0.02)
      .def_readwrite("width", &Arena::width)
      .def_readwrite("length", &Arena::length)
      .def_readwrite("safety_margin", &Arena::safety_margin)
      .def("validate", &Arena::validate);

  py::class_<Voi>(m, "Voi")
      .def(py::init([](std::string id, Vec2 p, double radius, double prior) {
             return Voi{std::move(id), p, radius, prior, std::nullopt};
           }),
           py::arg("id"), py::arg("position"), py::arg("radius") = kBallRadius,
           py::arg("prior") = 1.0)
      .def_readwrite("id", &Voi::id)
      .def_readwrite("position", &Voi::position)
      .def_readwrite("radius", &Voi::radius)
      .def_readwrite("prior", &Voi::prior)
      .def_readwrite("physical_offset", &Voi::physical_offset)
      .def("physical_position", &Voi::physical_position);

  py::class_<UserState>(m, "UserState")
      .def(py::init([](Pose pose, bool tracked, double time) { return UserState{pose, tracked, time}; }),
           py::arg("pose"), py::arg("tracked") = true, py::arg("time") = 0.0)
      .def_readwrite("pose", &UserState::pose)
      .def_readwrite("tracked", &UserState::tracked)
      .def_readwrite("time", &UserState::time);

  py::class_<SpeedProfile>(m, "SpeedProfile")
      .def(py::init<>())
      .def_readwrite("slow_speed", &SpeedProfile::slow_speed)
      .def_readwrite("fast_speed", &SpeedProfile::fast_speed)
      .def_readwrite("slow_below", &SpeedProfile::slow_below)
      .def_readwrite("fast_above", &SpeedProfile::fast_above);

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("omega", &SimConfig::omega)
      .def_readwrite("dt", &SimConfig::dt)
      .def_readwrite("stickiness_threshold", &SimConfig::stickiness_threshold)
      .def_readwrite("obstacle_radius_far", &SimConfig::obstacle_radius_far)
      .def_readwrite("obstacle_radius_near", &SimConfig::obstacle_radius_near)
      .def_readwrite("near_voi_distance", &SimConfig::near_voi_distance)
      .def_readwrite("near_transition", &SimConfig::near_transition)
      .def_readwrite("influence_band", &SimConfig::influence_band)
      .def_readwrite("obstacle_stiffness", &SimConfig::obstacle_stiffness)
      .def_readwrite("success_distance", &SimConfig::success_distance)
      .def_readwrite("contact_reach", &SimConfig::contact_reach)
      .def_readwrite("spring_stiffness", &SimConfig::spring_stiffness)
      .def_readwrite("spring_damping", &SimConfig::spring_damping)
      .def_readwrite("proxy_mass", &SimConfig::proxy_mass)
      .def_readwrite("speed", &SimConfig::speed)
      .def_readwrite("robot_max_accel", &SimConfig::robot_max_accel)
      .def_readwrite("tracking_loss_timeout", &SimConfig::tracking_loss_timeout)
      .def_readwrite("trial_timeout", &SimConfig::trial_timeout)
      .def_readwrite("rng_seed", &SimConfig::rng_seed)
      .def("validate", &SimConfig::validate);

  // ---- intention

  py::class_<WeightEntry>(m, "WeightEntry")
      .def_readonly("voi_id", &WeightEntry::voi_id)
      .def_readonly("raw", &WeightEntry::raw)
      .def_readonly("sticky", &WeightEntry::sticky)
      .def_readonly("effective", &WeightEntry::effective);

  py::class_<WeightVector>(m, "WeightVector")
      .def(py::init<>())
      .def_readwrite("entries", &WeightVector::entries)
      .def("total", &WeightVector::total);

  py::class_<CommandPosition>(m, "CommandPosition")
      .def(py::init<>())
      .def_readwrite("target", &CommandPosition::target)
      .def_readwrite("degenerate", &CommandPosition::degenerate);

  m.def("distance_score", &distance_score, py::arg("d"));
  m.def("orientation_score", &orientation_score, py::arg("theta"));
  m.def("angular_offset", &angular_offset, py::arg("user"), py::arg("voi"));
  m.def("raw_weight", &raw_weight, py::arg("d"), py::arg("theta"), py::arg("omega"));
  m.def("apply_stickiness", &apply_stickiness, py::arg("w"), py::arg("threshold") = 0.8);
  m.def("apply_prior", &apply_prior, py::arg("w"), py::arg("prior"));
  m.def(
      "compute_weights",
      [](const UserState& user, const std::vector<Voi>& vois, const SimConfig& config) {
        return compute_weights(user, vois, config);
      },
      py::arg("user"), py::arg("vois"), py::arg("config") = SimConfig{});
  m.def(
      "command_position",
      [](const WeightVector& w, const std::vector<Voi>& vois, const CommandPosition& prev,
         const Arena& arena) { return command_position(w, vois, prev, arena); },
      py::arg("weights"), py::arg("vois"), py::arg("previous") = CommandPosition{},
      py::arg("arena") = Arena{});

  // ---- proxy and robot

  py::class_<ObstacleState>(m, "ObstacleState")
      .def(py::init([](Vec2 c, double r, double band) { return ObstacleState{c, r, band}; }),
           py::arg("center"), py::arg("radius") = 0.45, py::arg("influence_band") = 0.30)
      .def_readwrite("center", &ObstacleState::center)
      .def_readwrite("radius", &ObstacleState::radius)
      .def_readwrite("influence_band", &ObstacleState::influence_band);

  py::class_<ProxyState>(m, "ProxyState")
      .def(py::init([](Vec2 p, Vec2 v) { return ProxyState{p, v}; }), py::arg("position"),
           py::arg("velocity") = Vec2{})
      .def_readwrite("position", &ProxyState::position)
      .def_readwrite("velocity", &ProxyState::velocity);

  m.def(
      "step_proxy",
      [](const ProxyState& p, const CommandPosition& c, const ObstacleState& o, const Arena& a,
         const SimConfig& config) { return step_proxy(p, c, o, a, config); },
      py::arg("proxy"), py::arg("command"), py::arg("obstacle"), py::arg("arena") = Arena{},
      py::arg("config") = SimConfig{});
  m.def("speed_cap", &speed_cap, py::arg("remaining"), py::arg("profile") = SpeedProfile{});

  py::enum_<RobotStatus>(m, "RobotStatus")
      .value("active", RobotStatus::active)
      .value("halted_tracking_loss", RobotStatus::halted_tracking_loss)
      .value("halted_estop", RobotStatus::halted_estop)
      .value("halted_rail_limit", RobotStatus::halted_rail_limit);

  py::class_<RobotState>(m, "RobotState")
      .def_readonly("position", &RobotState::position)
      .def_readonly("velocity", &RobotState::velocity)
      .def_readonly("status", &RobotState::status)
      .def_readonly("estop_latched", &RobotState::estop_latched);

  py::class_<Frame>(m, "Frame")
      .def_readonly("t", &Frame::t)
      .def_readonly("user", &Frame::user)
      .def_readonly("weights", &Frame::weights)
      .def_readonly("command", &Frame::command)
      .def_readonly("obstacle", &Frame::obstacle)
      .def_readonly("proxy", &Frame::proxy)
      .def_readonly("robot", &Frame::robot);

  // ---- trials

  py::class_<TrialSpec>(m, "TrialSpec")
      .def_readonly("seed", &TrialSpec::seed)
      .def_readonly("n_distractors", &TrialSpec::n_distractors)
      .def_readonly("vois", &TrialSpec::vois)
      .def_readonly("user_start", &TrialSpec::user_start)
      .def_readonly("robot_start", &TrialSpec::robot_start)
      .def("target", &TrialSpec::target);

  m.def(
      "generate_trial",
      [](std::uint64_t seed, int n, const Arena& arena) { return generate_trial(seed, n, arena); },
      py::arg("seed"), py::arg("n_distractors"), py::arg("arena") = Arena{});

  py::class_<WalkerParams>(m, "WalkerParams")
      .def(py::init<>())
      .def_readwrite("name", &WalkerParams::name)
      .def_readwrite("walk_speed", &WalkerParams::walk_speed)
      .def_readwrite("decision_delay_min", &WalkerParams::decision_delay_min)
      .def_readwrite("decision_delay_max", &WalkerParams::decision_delay_max)
      .def_readwrite("turn_rate", &WalkerParams::turn_rate)
      .def_readwrite("gaze_noise", &WalkerParams::gaze_noise)
      .def_readwrite("scan_dwell", &WalkerParams::scan_dwell)
      .def_readwrite("approach_slowdown", &WalkerParams::approach_slowdown)
      .def_readwrite("approach_min_fraction", &WalkerParams::approach_min_fraction)
      .def("validate", &WalkerParams::validate);
  m.def("default_cohort", &default_cohort);

  py::class_<SafetyStats>(m, "SafetyStats")
      .def_readonly("frames", &SafetyStats::frames)
      .def_readonly("max_proxy_penetration", &SafetyStats::max_proxy_penetration)
      .def_readonly("max_robot_intrusion", &SafetyStats::max_robot_intrusion)
      .def_readonly("speed_cap_violations", &SafetyStats::speed_cap_violations)
      .def_readonly("margin_violations", &SafetyStats::margin_violations);

  py::class_<TrialResult>(m, "TrialResult")
      .def_readonly("success", &TrialResult::success)
      .def_readonly("contacted_id", &TrialResult::contacted_id)
      .def_readonly("distance_at_contact", &TrialResult::distance_at_contact)
      .def_readonly("detection_time", &TrialResult::detection_time)
      .def_readonly("min_user_proxy_clearance", &TrialResult::min_user_proxy_clearance)
      .def_readonly("collision", &TrialResult::collision)
      .def_readonly("duration", &TrialResult::duration)
      .def_readonly("mean_proxy_robot_distance", &TrialResult::mean_proxy_robot_distance)
      .def_readonly("final_second_proxy_robot_distance",
                    &TrialResult::final_second_proxy_robot_distance)
      .def_readonly("safety", &TrialResult::safety)
      .def_readonly("frames", &TrialResult::frames)
      .def("to_json", &trial_result_json);

  m.def(
      "run_trial",
      [](const TrialSpec& spec, const WalkerParams& walker, const Arena& arena,
         const SimConfig& config, bool record_frames) {
        py::gil_scoped_release release;
        return run_trial(spec, walker, arena, config, record_frames);
      },
      py::arg("spec"), py::arg("walker") = WalkerParams{}, py::arg("arena") = Arena{},
      py::arg("config") = SimConfig{}, py::arg("record_frames") = false);

  // ---- sweeps

  py::class_<MeanCi>(m, "MeanCi")
      .def_readonly("mean", &MeanCi::mean)
      .def_readonly("half_width", &MeanCi::half_width);
  m.def(
      "summarize", [](const std::vector<double>& s) { return summarize(s); }, py::arg("samples"));

  py::class_<SummaryRow>(m, "SummaryRow")
      .def_readonly("omega", &SummaryRow::omega)
      .def_readonly("condition", &SummaryRow::condition)
      .def_readonly("trials", &SummaryRow::trials)
      .def_readonly("success_rate", &SummaryRow::success_rate)
      .def_readonly("distance_at_contact", &SummaryRow::distance_at_contact)
      .def_readonly("detection_time", &SummaryRow::detection_time)
      .def_readonly("proxy_robot_distance", &SummaryRow::proxy_robot_distance)
      .def_readonly("collisions", &SummaryRow::collisions);

  py::class_<SweepSummary>(m, "SweepSummary")
      .def_readonly("rows", &SweepSummary::rows)
      .def("summary_csv", &summary_csv)
      .def("trials_csv", &trials_csv)
      .def("write", &write_results, py::arg("dir"));

  py::class_<OmegaChoice>(m, "OmegaChoice")
      .def_readonly("condition", &OmegaChoice::condition)
      .def_readonly("omega", &OmegaChoice::omega)
      .def_readonly("success_rate", &OmegaChoice::success_rate);

  py::class_<OmegaFit>(m, "OmegaFit")
      .def_readonly("summary", &OmegaFit::summary)
      .def_readonly("per_condition", &OmegaFit::per_condition)
      .def_readonly("average", &OmegaFit::average)
      .def_readonly("coarse", &OmegaFit::coarse)
      .def_readonly("refined", &OmegaFit::refined);

  m.def("trial_seed", &trial_seed, py::arg("base_seed"), py::arg("block"), py::arg("condition"),
        py::arg("persona"));
  m.def("omega_grid", &omega_grid, py::arg("start"), py::arg("end"), py::arg("step"));
  m.def(
      "run_sweep",
      [](std::vector<double> omegas, std::vector<int> conditions, int blocks,
         std::uint64_t base_seed, std::optional<double> target_prior, const SimConfig& config,
         unsigned threads) {
        const SweepOptions o = sweep_options(std::move(omegas), std::move(conditions), blocks,
                                             base_seed, target_prior, config, threads);
        py::gil_scoped_release release;
        return run_sweep(o);
      },
      py::arg("omegas"), py::arg("conditions") = std::vector<int>{0, 1, 2, 3, 4},
      py::arg("blocks") = 10, py::arg("base_seed") = 0, py::arg("target_prior") = py::none(),
      py::arg("config") = SimConfig{}, py::arg("threads") = 0);
  m.def(
      "fit_omega",
      [](std::vector<int> conditions, int blocks, std::uint64_t base_seed,
         const SimConfig& config, unsigned threads) {
        const SweepOptions o =
            sweep_options({}, std::move(conditions), blocks, base_seed, std::nullopt, config, threads);
        py::gil_scoped_release release;
        return fit_omega(o);
      },
      py::arg("conditions") = std::vector<int>{0, 1, 2, 3, 4}, py::arg("blocks") = 10,
      py::arg("base_seed") = 0, py::arg("config") = SimConfig{}, py::arg("threads") = 0);

  // ---- files

  py::class_<Scenario>(m, "Scenario")
      .def_readwrite("arena", &Scenario::arena)
      .def_readwrite("vois", &Scenario::vois)
      .def_readwrite("target", &Scenario::target)
      .def_readwrite("user_start", &Scenario::user_start)
      .def_readwrite("robot_start", &Scenario::robot_start)
      .def_readwrite("config", &Scenario::config)
      .def("validate", &Scenario::validate)
      .def("to_json", &scenario_to_json);

  m.def(
      "scenario_from_trial",
      [](const TrialSpec& spec, const Arena& arena, const SimConfig& config) {
        return scenario_from_trial(spec, arena, config);
      },
      py::arg("spec"), py::arg("arena") = Arena{}, py::arg("config") = SimConfig{});
  m.def("scenario_from_json", &scenario_from_json, py::arg("text"),
        py::arg("source") = "scenario");
  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def("save_scenario", &save_scenario, py::arg("path"), py::arg("scenario"));
}
