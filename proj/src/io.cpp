#include "encounter/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "json_fields.hpp"

namespace encounter {

using detail::Fields;
using detail::json;
using detail::ordered_json;
using detail::Where;

FormatError::FormatError(std::string source, std::size_t line, std::string field,
                         const std::string& what)
    : std::runtime_error([&] {
        std::string msg = source;
        if (line > 0) msg += ":" + std::to_string(line);
        msg += ": ";
        if (!field.empty()) msg += field + ": ";
        return msg + what;
      }()),
      source_(std::move(source)),
      line_(line),
      field_(std::move(field)) {}

std::string format_number(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace {

ordered_json vec_json(Vec2 v) { return ordered_json{{"x", v.x}, {"y", v.y}}; }

void require_finite(const ordered_json& j, const std::string& path) {
  if (j.is_number_float() && !std::isfinite(j.get<double>())) {
    throw std::invalid_argument(path + ": non-finite value cannot be written");
  }
  if (j.is_structured()) {
    for (const auto& [k, v] : j.items()) require_finite(v, path.empty() ? k : path + "." + k);
  }
}

// ---- config table ----------------------------------------------------------

struct ConfigField {
  std::string_view name;
  double SimConfig::*member;
};

constexpr std::array<ConfigField, 17> kConfigFields{{
    {"omega", &SimConfig::omega},
    {"dt", &SimConfig::dt},
    {"stickiness_threshold", &SimConfig::stickiness_threshold},
    {"obstacle_radius_far", &SimConfig::obstacle_radius_far},
    {"obstacle_radius_near", &SimConfig::obstacle_radius_near},
    {"near_voi_distance", &SimConfig::near_voi_distance},
    {"near_transition", &SimConfig::near_transition},
    {"influence_band", &SimConfig::influence_band},
    {"obstacle_stiffness", &SimConfig::obstacle_stiffness},
    {"success_distance", &SimConfig::success_distance},
    {"contact_reach", &SimConfig::contact_reach},
    {"spring_stiffness", &SimConfig::spring_stiffness},
    {"spring_damping", &SimConfig::spring_damping},
    {"proxy_mass", &SimConfig::proxy_mass},
    {"robot_max_accel", &SimConfig::robot_max_accel},
    {"tracking_loss_timeout", &SimConfig::tracking_loss_timeout},
    {"trial_timeout", &SimConfig::trial_timeout},
}};

struct SpeedField {
  std::string_view name;
  double SpeedProfile::*member;
};

constexpr std::array<SpeedField, 4> kSpeedFields{{
    {"slow_speed", &SpeedProfile::slow_speed},
    {"fast_speed", &SpeedProfile::fast_speed},
    {"slow_below", &SpeedProfile::slow_below},
    {"fast_above", &SpeedProfile::fast_above},
}};

// Only values that differ from the defaults are written.
ordered_json config_json(const SimConfig& c) {
  const SimConfig d;
  ordered_json j = ordered_json::object();
  for (const auto& f : kConfigFields) {
    if (c.*f.member != d.*f.member) j[std::string(f.name)] = c.*f.member;
  }
  ordered_json speed = ordered_json::object();
  for (const auto& f : kSpeedFields) {
    if (c.speed.*f.member != d.speed.*f.member) speed[std::string(f.name)] = c.speed.*f.member;
  }
  if (!speed.empty()) j["speed"] = speed;
  if (c.rng_seed != d.rng_seed) j["rng_seed"] = c.rng_seed;
  return j;
}

SimConfig read_config(const json& j, const Where& where) {
  SimConfig c;
  Fields f(j, "config", where);
  for (const auto& field : kConfigFields) {
    c.*field.member = f.number_or(field.name, c.*field.member);
  }
  if (const json* s = f.find("speed")) {
    Fields sf(*s, "config.speed", where);
    for (const auto& field : kSpeedFields) {
      c.speed.*field.member = sf.number_or(field.name, c.speed.*field.member);
    }
    sf.finish();
  }
  if (const json* seed = f.find("rng_seed")) {
    if (!seed->is_number_unsigned()) where.fail("config.rng_seed", "expected an unsigned integer");
    c.rng_seed = seed->get<std::uint64_t>();
  }
  f.finish();
  return c;
}

ordered_json walker_json(const WalkerParams& w) {
  return ordered_json{{"name", w.name},
                      {"walk_speed", w.walk_speed},
                      {"decision_delay_min", w.decision_delay_min},
                      {"decision_delay_max", w.decision_delay_max},
                      {"turn_rate", w.turn_rate},
                      {"gaze_noise", w.gaze_noise},
                      {"scan_dwell", w.scan_dwell},
                      {"approach_slowdown", w.approach_slowdown},
                      {"approach_min_fraction", w.approach_min_fraction}};
}

WalkerParams read_walker(const json& j, const Where& where) {
  WalkerParams w;
  Fields f(j, "walker", where);
  if (f.find("name")) w.name = f.string("name");
  w.walk_speed = f.number_or("walk_speed", w.walk_speed);
  w.decision_delay_min = f.number_or("decision_delay_min", w.decision_delay_min);
  w.decision_delay_max = f.number_or("decision_delay_max", w.decision_delay_max);
  w.turn_rate = f.number_or("turn_rate", w.turn_rate);
  w.gaze_noise = f.number_or("gaze_noise", w.gaze_noise);
  w.scan_dwell = f.number_or("scan_dwell", w.scan_dwell);
  w.approach_slowdown = f.number_or("approach_slowdown", w.approach_slowdown);
  w.approach_min_fraction = f.number_or("approach_min_fraction", w.approach_min_fraction);
  f.finish();
  return w;
}

ordered_json state_json(const SimState& s) {
  ordered_json weights = ordered_json::array();
  for (const auto& e : s.weights.entries) {
    weights.push_back(
        {{"id", e.voi_id}, {"raw", e.raw}, {"sticky", e.sticky}, {"effective", e.effective}});
  }
  ordered_json j{
      {"proxy", {{"position", vec_json(s.proxy.position)}, {"velocity", vec_json(s.proxy.velocity)}}},
      {"robot",
       {{"position", vec_json(s.robot.position)},
        {"velocity", vec_json(s.robot.velocity)},
        {"status", std::string(to_string(s.robot.status))},
        {"estop_latched", s.robot.estop_latched},
        {"user_tracked", s.robot.user_tracked},
        {"last_tracked_time", s.robot.last_tracked_time}}},
      {"command",
       {{"x", s.command.target.x}, {"y", s.command.target.y}, {"degenerate", s.command.degenerate}}},
      {"weights", weights}};
  if (s.last_tracked_user) {
    const UserState& u = *s.last_tracked_user;
    j["last_tracked_user"] = {{"x", u.pose.position.x},
                              {"y", u.pose.position.y},
                              {"heading", u.pose.heading},
                              {"tracked", u.tracked},
                              {"time", u.time}};
  }
  return j;
}

SimState read_state(const json& j, const Where& where) {
  SimState s;
  Fields f(j, "initial_state", where);
  {
    Fields p(f.at("proxy"), "initial_state.proxy", where);
    s.proxy.position = p.vec("position");
    s.proxy.velocity = p.vec("velocity");
    p.finish();
  }
  {
    Fields r(f.at("robot"), "initial_state.robot", where);
    s.robot.position = r.vec("position");
    s.robot.velocity = r.vec("velocity");
    try {
      s.robot.status = robot_status_from_string(r.string("status"));
    } catch (const std::invalid_argument&) {
      where.fail("initial_state.robot.status", "unknown robot status");
    }
    s.robot.estop_latched = r.boolean("estop_latched");
    s.robot.user_tracked = r.boolean("user_tracked");
    s.robot.last_tracked_time = r.number("last_tracked_time");
    r.finish();
  }
  {
    Fields c(f.at("command"), "initial_state.command", where);
    s.command.target = {c.number("x"), c.number("y")};
    s.command.degenerate = c.boolean("degenerate");
    c.finish();
  }
  const json& weights = f.at("weights");
  if (!weights.is_array()) where.fail("initial_state.weights", "expected an array");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    Fields w(weights[i], "initial_state.weights[" + std::to_string(i) + "]", where);
    s.weights.entries.push_back(
        {w.string("id"), w.number("raw"), w.number("sticky"), w.number("effective")});
    w.finish();
  }
  if (const json* u = f.find("last_tracked_user")) {
    Fields uf(*u, "initial_state.last_tracked_user", where);
    UserState user;
    user.pose.position = {uf.number("x"), uf.number("y")};
    user.pose.heading = uf.number("heading");
    user.tracked = uf.boolean("tracked");
    user.time = uf.number("time");
    uf.finish();
    s.last_tracked_user = user;
  }
  f.finish();
  return s;
}

}  // namespace

// ---- traces ----------------------------------------------------------------

TraceFrame trace_frame(const Frame& frame, bool estop) {
  TraceFrame out;
  out.t = frame.t;
  out.pose = frame.user.pose;
  out.tracked = frame.user.tracked;
  out.proxy = frame.proxy.position;
  out.robot = frame.robot.position;
  std::vector<std::pair<std::string, double>> w;
  for (const auto& e : frame.weights.entries) w.emplace_back(e.voi_id, e.effective);
  out.weights = std::move(w);
  out.estop = estop;
  return out;
}

std::string format_trace_line(const TraceFrame& f) {
  ordered_json j{{"v", kTraceVersion},
                 {"t", f.t},
                 {"x", f.pose.position.x},
                 {"y", f.pose.position.y},
                 {"heading", f.pose.heading},
                 {"tracked", f.tracked}};
  if (f.proxy) j["proxy"] = vec_json(*f.proxy);
  if (f.robot) j["robot"] = vec_json(*f.robot);
  if (f.weights) {
    ordered_json w = ordered_json::object();
    for (const auto& [id, value] : *f.weights) w[id] = value;
    j["weights"] = w;
  }
  if (f.estop) j["estop"] = true;
  require_finite(j, "trace");
  return j.dump();
}

namespace {

TraceFrame parse_trace(std::string_view line, const Where& where) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    where.fail("", std::string("invalid JSON: ") + e.what());
  }
  Fields f(j, "", where);
  const json& v = f.at("v");
  if (!v.is_number_integer() || v.get<long long>() != kTraceVersion) {
    where.fail("v", "unsupported trace version");
  }
  TraceFrame out;
  out.t = f.number("t");
  out.pose.position = {f.number("x"), f.number("y")};
  out.pose.heading = f.number("heading");
  out.tracked = f.boolean("tracked");
  if (const json* p = f.find("proxy")) out.proxy = Fields::read_vec(*p, "proxy", where);
  if (const json* r = f.find("robot")) out.robot = Fields::read_vec(*r, "robot", where);
  if (const json* w = f.find("weights")) {
    if (!w->is_object()) where.fail("weights", "expected an object");
    std::vector<std::pair<std::string, double>> weights;
    for (const auto& [id, value] : w->items()) {
      weights.emplace_back(id, Fields::as_number(value, "weights." + id, where));
    }
    out.weights = std::move(weights);
  }
  out.estop = f.boolean_or("estop", false);
  f.finish();
  return out;
}

}  // namespace

TraceFrame parse_trace_line(std::string_view line, std::size_t line_no) {
  return parse_trace(line, Where{"trace", line_no});
}

void save_trace(const std::filesystem::path& path, std::span<const TraceFrame> frames) {
  TraceWriter writer(path);
  for (const auto& f : frames) writer.append(f);
}

std::vector<TraceFrame> load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<TraceFrame> frames;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    TraceFrame f = parse_trace(line, Where{path.string(), n});
    if (!frames.empty() && !(f.t > frames.back().t)) {
      throw FormatError(path.string(), n, "t", "time must increase from line to line");
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

TraceWriter::TraceWriter(const std::filesystem::path& path)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
}

void TraceWriter::append(const TraceFrame& frame) {
  if (last_t_ && !(frame.t > *last_t_)) {
    throw std::invalid_argument("trace time must increase");
  }
  out_ << format_trace_line(frame) << '\n';
  out_.flush();
  if (!out_) throw std::runtime_error("write failed: " + path_.string());
  last_t_ = frame.t;
  ++frames_;
}

std::optional<UserState> TraceSource::next(double, double) {
  if (index_ >= frames_.size()) return std::nullopt;
  const TraceFrame& f = frames_[index_++];
  estop_ = f.estop;
  return f.user();
}

// ---- scenarios -------------------------------------------------------------

void Scenario::validate() const {
  arena.validate();
  config.validate();
  if (vois.empty()) throw ValidationError("vois", "at least one VOI is required");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < vois.size(); ++i) {
    const std::string path = "vois[" + std::to_string(i) + "]";
    vois[i].validate(arena, path);
    if (!ids.insert(vois[i].id).second) throw ValidationError(path + ".id", "duplicate id");
  }
  if (target && !ids.contains(*target)) throw ValidationError("target", "no VOI with this id");
  if (!user_start.position.finite() || !arena.contains(user_start.position)) {
    throw ValidationError("user_start", "must lie inside the arena");
  }
  if (!std::isfinite(user_start.heading)) throw ValidationError("user_start.heading", "must be finite");
  if (!robot_start.finite() || !arena.contains(robot_start)) {
    throw ValidationError("robot_start", "must lie inside the arena");
  }
  if (walker) walker->validate();
  if (initial_state) {
    if (initial_state->weights.entries.size() != 0 &&
        initial_state->weights.entries.size() != vois.size()) {
      throw ValidationError("initial_state.weights", "must have one entry per VOI");
    }
  }
}

Scenario scenario_from_trial(const TrialSpec& spec, const Arena& arena, const SimConfig& config,
                             std::optional<WalkerParams> walker) {
  Scenario s;
  s.arena = arena;
  s.vois = spec.vois;
  s.target = spec.target().id;
  s.user_start = spec.user_start;
  s.robot_start = spec.robot_start;
  s.config = config;
  s.walker = std::move(walker);
  return s;
}

Simulator make_simulator(const Scenario& s) {
  if (s.initial_state) return Simulator(s.arena, s.vois, s.config, *s.initial_state);
  return Simulator(s.arena, s.vois, s.config, s.robot_start);
}

std::string scenario_to_json(const Scenario& s) {
  ordered_json vois = ordered_json::array();
  for (const auto& v : s.vois) {
    ordered_json jv{{"id", v.id},
                    {"x", v.position.x},
                    {"y", v.position.y},
                    {"radius", v.radius},
                    {"prior", v.prior}};
    if (v.physical_offset) jv["physical_offset"] = vec_json(*v.physical_offset);
    vois.push_back(jv);
  }
  ordered_json j{{"format", kScenarioFormat},
                 {"version", kScenarioVersion},
                 {"arena",
                  {{"width", s.arena.width},
                   {"length", s.arena.length},
                   {"safety_margin", s.arena.safety_margin}}},
                 {"vois", vois}};
  if (s.target) j["target"] = *s.target;
  j["user_start"] = {{"x", s.user_start.position.x},
                     {"y", s.user_start.position.y},
                     {"heading", s.user_start.heading}};
  j["robot_start"] = vec_json(s.robot_start);
  const ordered_json config = config_json(s.config);
  if (!config.empty()) j["config"] = config;
  if (s.walker) j["walker"] = walker_json(*s.walker);
  if (s.initial_state) j["initial_state"] = state_json(*s.initial_state);
  require_finite(j, "");
  return j.dump(2) + "\n";
}

Scenario scenario_from_json(std::string_view text, const std::string& source) {
  const Where where{source, 0};
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // Point at the line holding the offending byte.
    const std::size_t at = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    const auto line = static_cast<std::size_t>(std::count(text.begin(), text.begin() + at, '\n')) + 1;
    throw FormatError(source, line, "", std::string("invalid JSON: ") + e.what());
  }
  Fields f(j, "", where);
  if (f.string("format") != kScenarioFormat) where.fail("format", "not an encounter scenario");
  const json& version = f.at("version");
  if (!version.is_number_integer() || version.get<long long>() != kScenarioVersion) {
    where.fail("version", "unsupported scenario version");
  }

  Scenario s;
  if (const json* a = f.find("arena")) {
    Fields af(*a, "arena", where);
    s.arena.width = af.number_or("width", s.arena.width);
    s.arena.length = af.number_or("length", s.arena.length);
    s.arena.safety_margin = af.number_or("safety_margin", s.arena.safety_margin);
    af.finish();
  }
  const json& vois = f.at("vois");
  if (!vois.is_array()) where.fail("vois", "expected an array");
  for (std::size_t i = 0; i < vois.size(); ++i) {
    Fields vf(vois[i], "vois[" + std::to_string(i) + "]", where);
    Voi v;
    v.id = vf.string("id");
    v.position = {vf.number("x"), vf.number("y")};
    v.radius = vf.number_or("radius", v.radius);
    v.prior = vf.number_or("prior", 1.0);
    if (vf.find("physical_offset")) v.physical_offset = vf.vec("physical_offset");
    vf.finish();
    s.vois.push_back(std::move(v));
  }
  if (f.find("target")) s.target = f.string("target");
  {
    Fields uf(f.at("user_start"), "user_start", where);
    s.user_start.position = {uf.number("x"), uf.number("y")};
    s.user_start.heading = uf.number("heading");
    uf.finish();
  }
  s.robot_start = f.vec("robot_start");
  if (const json* c = f.find("config")) s.config = read_config(*c, where);
  if (const json* w = f.find("walker")) s.walker = read_walker(*w, where);
  if (const json* st = f.find("initial_state")) s.initial_state = read_state(*st, where);
  f.finish();

  try {
    s.validate();
  } catch (const ValidationError& e) {
    // ValidationError text is "<field>: <reason>".
    throw FormatError(source, 0, e.field(), std::string(e.what()).substr(e.field().size() + 2));
  }
  return s;
}

void save_scenario(const std::filesystem::path& path, const Scenario& scenario) {
  scenario.validate();
  write_file(path, scenario_to_json(scenario));
}

Scenario load_scenario(const std::filesystem::path& path) {
  return scenario_from_json(read_file(path), path.string());
}

// ---- results ---------------------------------------------------------------

std::string trial_result_json(const TrialResult& r) {
  auto num = [](std::optional<double> v) {
    return v && std::isfinite(*v) ? ordered_json(*v) : ordered_json(nullptr);
  };
  ordered_json j{
      {"success", r.success},
      {"contacted_id", r.contacted_id ? ordered_json(*r.contacted_id) : ordered_json(nullptr)},
      {"distance_at_contact", num(r.distance_at_contact)},
      {"detection_time", num(r.detection_time)},
      {"min_user_proxy_clearance", num(r.min_user_proxy_clearance)},
      {"collision", r.collision},
      {"duration", r.duration},
      {"mean_proxy_robot_distance", r.mean_proxy_robot_distance},
      {"final_second_proxy_robot_distance", num(r.final_second_proxy_robot_distance)},
      {"safety",
       {{"frames", r.safety.frames},
        {"max_proxy_penetration", r.safety.max_proxy_penetration},
        {"max_robot_intrusion", r.safety.max_robot_intrusion},
        {"speed_cap_violations", r.safety.speed_cap_violations},
        {"margin_violations", r.safety.margin_violations}}}};
  return j.dump();
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

void mean_ci(std::ostringstream& out, const std::optional<MeanCi>& m) {
  if (m) {
    out << ',' << format_number(m->mean) << ',' << format_number(m->half_width);
  } else {
    out << ",,";
  }
}

}  // namespace

std::string summary_csv(const SweepSummary& summary) {
  std::ostringstream out;
  out << "# format: " << kSummaryFormat << '\n'
      << "omega,condition,trials,success_rate,success_ci95,distance_at_contact,"
         "distance_at_contact_ci95,detection_time,detection_time_ci95,"
         "proxy_robot_distance,proxy_robot_distance_ci95,collisions\n";
  for (const auto& r : summary.rows) {
    out << format_number(r.omega) << ',' << r.condition << ',' << r.trials;
    mean_ci(out, r.success_rate);
    mean_ci(out, r.distance_at_contact);
    mean_ci(out, r.detection_time);
    mean_ci(out, r.proxy_robot_distance);
    out << ',' << r.collisions << '\n';
  }
  return out.str();
}

std::string trials_csv(const SweepSummary& summary) {
  std::ostringstream out;
  out << "# format: " << kTrialsFormat << '\n'
      << "omega,condition,block,persona,seed,success,distance_at_contact,detection_time,"
         "min_user_proxy_clearance,collision,duration,mean_proxy_robot_distance,"
         "final_second_proxy_robot_distance,max_proxy_penetration,max_robot_intrusion,"
         "speed_cap_violations,margin_violations\n";
  for (const auto& t : summary.trials) {
    out << format_number(t.omega) << ',' << t.condition << ',' << t.block << ',' << t.persona
        << ',' << t.seed << ',' << (t.success ? 1 : 0) << ',' << opt(t.distance_at_contact)
        << ',' << opt(t.detection_time) << ',' << format_number(t.min_user_proxy_clearance)
        << ',' << (t.collision ? 1 : 0) << ',' << format_number(t.duration) << ','
        << format_number(t.mean_proxy_robot_distance) << ','
        << opt(t.final_second_proxy_robot_distance) << ','
        << format_number(t.safety.max_proxy_penetration) << ','
        << format_number(t.safety.max_robot_intrusion) << ',' << t.safety.speed_cap_violations
        << ',' << t.safety.margin_violations << '\n';
  }
  return out.str();
}

void write_results(const SweepSummary& summary, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "summary.csv", summary_csv(summary));
  write_file(dir / "trials.csv", trials_csv(summary));
}

}  // namespace encounter
