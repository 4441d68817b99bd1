#include "encounter/session.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json_fields.hpp"

namespace encounter {

using detail::Fields;
using detail::json;
using detail::ordered_json;
using detail::Where;

namespace {

ordered_json xy(Vec2 v) { return ordered_json{{"x", v.x}, {"y", v.y}}; }

// JSON has no infinity or NaN; absent values go out as null.
ordered_json number_or_null(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

ordered_json optional_number(const std::optional<double>& v) {
  return v ? number_or_null(*v) : ordered_json(nullptr);
}

}  // namespace

std::string error_json(std::string_view message, std::string_view request_type) {
  ordered_json j{{"v", kProtocolVersion}, {"type", "error"}};
  j["request"] = request_type.empty() ? ordered_json(nullptr) : ordered_json(request_type);
  j["message"] = message;
  return j.dump();
}

std::string warning_json(std::string_view message) {
  return ordered_json{{"v", kProtocolVersion}, {"type", "warning"}, {"message", message}}.dump();
}

std::string hello_json(const SimConfig& config) {
  return ordered_json{{"v", kProtocolVersion},
                      {"type", "hello"},
                      {"dt", config.dt},
                      {"steps_per_tick", kStepsPerBroadcast},
                      {"max_steering_speed", kMaxSteeringSpeed}}
      .dump();
}

std::string tick_json(const Tick& tick) {
  const Frame& f = tick.frame;
  ordered_json vois = ordered_json::array();
  for (const Voi& v : tick.vois) {
    ordered_json jv{{"id", v.id}, {"x", v.position.x}, {"y", v.position.y},
                    {"radius", v.radius}, {"prior", v.prior}};
    if (v.physical_offset) jv["physical_offset"] = xy(*v.physical_offset);
    vois.push_back(jv);
  }
  ordered_json weights = ordered_json::array();
  for (const WeightEntry& e : f.weights.entries) {
    weights.push_back(
        {{"id", e.voi_id}, {"raw", e.raw}, {"sticky", e.sticky}, {"effective", e.effective}});
  }
  ordered_json metrics{{"min_clearance", number_or_null(tick.min_clearance)}};
  metrics["last_detection"] =
      tick.last_detection
          ? ordered_json{{"id", tick.last_detection->first}, {"t", tick.last_detection->second}}
          : ordered_json(nullptr);
  metrics["contact"] = tick.contact ? ordered_json{{"id", tick.contact->voi_id},
                                                   {"robot_distance", tick.contact->robot_distance},
                                                   {"success", tick.contact->success}}
                                    : ordered_json(nullptr);
  if (tick.trial) {
    const TrialResult& r = *tick.trial;
    metrics["trial"] = {{"success", r.success},
                        {"contacted_id", r.contacted_id ? ordered_json(*r.contacted_id)
                                                        : ordered_json(nullptr)},
                        {"distance_at_contact", optional_number(r.distance_at_contact)},
                        {"detection_time", optional_number(r.detection_time)},
                        {"duration", r.duration}};
  } else {
    metrics["trial"] = nullptr;
  }

  ordered_json j{
      {"v", kProtocolVersion},
      {"type", "tick"},
      {"step", tick.step},
      {"t", tick.t},
      {"paused", tick.paused},
      {"recording", tick.recording},
      {"arena",
       {{"width", tick.arena.width},
        {"length", tick.arena.length},
        {"safety_margin", tick.arena.safety_margin}}},
      {"omega", tick.omega},
      {"target", tick.target ? ordered_json(*tick.target) : ordered_json(nullptr)},
      {"vois", vois},
      {"user",
       {{"x", f.user.pose.position.x},
        {"y", f.user.pose.position.y},
        {"heading", f.user.pose.heading},
        {"tracked", f.user.tracked}}},
      {"proxy",
       {{"x", f.proxy.position.x},
        {"y", f.proxy.position.y},
        {"vx", f.proxy.velocity.x},
        {"vy", f.proxy.velocity.y}}},
      {"robot",
       {{"x", f.robot.position.x},
        {"y", f.robot.position.y},
        {"vx", f.robot.velocity.x},
        {"vy", f.robot.velocity.y},
        {"status", std::string(to_string(f.robot.status))},
        {"estop_latched", f.robot.estop_latched}}},
      {"command", {{"x", f.command.target.x}, {"y", f.command.target.y},
                   {"degenerate", f.command.degenerate}}},
      {"obstacle",
       {{"x", f.obstacle.center.x},
        {"y", f.obstacle.center.y},
        {"radius", f.obstacle.radius},
        {"influence_band", f.obstacle.influence_band}}},
      {"weights", weights},
      {"metrics", metrics}};
  return j.dump();
}

// ---- commands --------------------------------------------------------------

struct Session::Command {
  enum class Kind {
    steer,
    set_omega,
    add_voi,
    move_voi,
    remove_voi,
    set_prior,
    pause,
    resume,
    reset,
    estop,
    release_estop,
    set_tracking_lost,
    record_start,
    record_stop,
  };
  Kind kind;
  std::string type;
  Steering steering;
  double value = 0.0;
  bool flag = false;
  Voi voi;
  std::optional<std::uint64_t> seed;
  std::optional<int> distractors;
};

namespace {

using Kind = Session::Command::Kind;

std::optional<Kind> kind_of(std::string_view type) {
  static const std::pair<std::string_view, Kind> table[] = {
      {"steer", Kind::steer},
      {"set_omega", Kind::set_omega},
      {"add_voi", Kind::add_voi},
      {"move_voi", Kind::move_voi},
      {"remove_voi", Kind::remove_voi},
      {"set_prior", Kind::set_prior},
      {"pause", Kind::pause},
      {"resume", Kind::resume},
      {"reset", Kind::reset},
      {"estop", Kind::estop},
      {"release_estop", Kind::release_estop},
      {"set_tracking_lost", Kind::set_tracking_lost},
      {"record_start", Kind::record_start},
      {"record_stop", Kind::record_stop},
  };
  for (const auto& [name, kind] : table) {
    if (name == type) return kind;
  }
  return std::nullopt;
}

Session::Command parse_command(std::string_view text) {
  const Where where{"message", 0};
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error&) {
    where.fail("", "invalid JSON");
  }
  Fields f(j, "", where);
  const json& v = f.at("v");
  if (!v.is_number_integer() || v.get<long long>() != kProtocolVersion) {
    where.fail("v", "unsupported protocol version");
  }
  Session::Command c{};
  c.type = f.string("type");
  const auto kind = kind_of(c.type);
  if (!kind) where.fail("type", "unknown message type '" + c.type + "'");
  c.kind = *kind;

  switch (c.kind) {
    case Kind::steer: {
      c.steering.velocity = {f.number("vx"), f.number("vy")};
      c.steering.heading_rate = f.number_or("heading_rate", 0.0);
      const double speed = c.steering.velocity.norm();
      if (speed > kMaxSteeringSpeed) c.steering.velocity = c.steering.velocity * (kMaxSteeringSpeed / speed);
      break;
    }
    case Kind::set_omega:
      c.value = f.number("omega");
      if (c.value < 0.0 || c.value > 1.0) where.fail("omega", "must be in [0, 1]");
      break;
    case Kind::add_voi:
      c.voi.id = f.string("id");
      c.voi.position = {f.number("x"), f.number("y")};
      c.voi.radius = f.number_or("radius", kBallRadius);
      c.voi.prior = f.number_or("prior", 1.0);
      break;
    case Kind::move_voi:
      c.voi.id = f.string("id");
      c.voi.position = {f.number("x"), f.number("y")};
      break;
    case Kind::remove_voi:
      c.voi.id = f.string("id");
      break;
    case Kind::set_prior:
      c.voi.id = f.string("id");
      c.value = f.number("prior");
      if (c.value < 0.0 || c.value > 1.0) where.fail("prior", "must be in [0, 1]");
      break;
    case Kind::reset:
      if (const json* s = f.find("seed")) {
        if (!s->is_number_unsigned()) where.fail("seed", "expected an unsigned integer");
        c.seed = s->get<std::uint64_t>();
      }
      if (const json* d = f.find("distractors")) {
        if (!d->is_number_integer()) where.fail("distractors", "expected an integer");
        const long long n = d->get<long long>();
        if (n < 0 || n > kMaxDistractors) where.fail("distractors", "must be in 0..4");
        c.distractors = static_cast<int>(n);
      }
      if (c.distractors && !c.seed) where.fail("distractors", "requires a seed");
      break;
    case Kind::set_tracking_lost:
      c.flag = f.boolean("lost");
      break;
    case Kind::pause:
    case Kind::resume:
    case Kind::estop:
    case Kind::release_estop:
    case Kind::record_start:
    case Kind::record_stop:
      break;
  }
  f.finish();
  return c;
}

std::string message_type(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.is_object() && j.contains("type") && j["type"].is_string()) {
      return j["type"].get<std::string>();
    }
  } catch (const json::exception&) {
  }
  return {};
}

}  // namespace

// ---- session ---------------------------------------------------------------

std::filesystem::path snapshot_path(const std::filesystem::path& trace) {
  std::filesystem::path p = trace;
  p.replace_extension(".scenario.json");
  return p;
}

Session::Session(Scenario scenario, std::optional<std::filesystem::path> record_dir)
    : initial_(std::move(scenario)),
      scene_(initial_),
      record_dir_(std::move(record_dir)),
      sim_(make_simulator(initial_)),
      monitor_(initial_.arena, initial_.vois, initial_.config, sim_.robot().position,
               initial_.target) {
  initial_.validate();
  restart(initial_);
}

Session::~Session() = default;

void Session::restart(const Scenario& scenario) {
  scene_ = scenario;
  scene_.initial_state.reset();
  sim_ = make_simulator(scenario);
  user_ = UserState{scenario.user_start, true, 0.0};
  steering_ = {};
  tracking_lost_ = false;
  steps_ = 0;
  contact_.reset();
  restart_monitor();
}

void Session::restart_monitor() {
  std::optional<std::string> target = scene_.target;
  if (target && std::none_of(scene_.vois.begin(), scene_.vois.end(),
                             [&](const Voi& v) { return v.id == *target; })) {
    target.reset();
  }
  scene_.target = target;
  monitor_ = TrialMonitor(scene_.arena, scene_.vois, scene_.config, sim_.robot().position, target);
}

std::optional<std::string> Session::submit(std::string_view text) {
  try {
    inbox_.push_back(parse_command(text));
  } catch (const FormatError& e) {
    // FormatError text is "message: <field>: <reason>"; keep the reason.
    const std::string full = e.what();
    const auto cut = full.find(": ");
    return error_json(cut == std::string::npos ? full : full.substr(cut + 2), message_type(text));
  }
  return std::nullopt;
}

void Session::warn(const std::string& message) { outbox_.push_back(warning_json(message)); }

void Session::scene_changed() {
  if (writer_) {
    warn("recording stopped: the scene was edited");
    stop_recording();
  }
  restart_monitor();
}

void Session::apply(const Command& c) {
  auto find = [&](const std::string& id) {
    return std::find_if(scene_.vois.begin(), scene_.vois.end(),
                        [&](const Voi& v) { return v.id == id; });
  };
  auto reject = [&](const std::string& message) {
    outbox_.push_back(error_json(message, c.type));
  };
  // Validates the edited list against the arena before it replaces the scene.
  auto commit = [&](std::vector<Voi> vois) {
    try {
      for (std::size_t i = 0; i < vois.size(); ++i) {
        vois[i].validate(scene_.arena, "vois[" + std::to_string(i) + "]");
      }
    } catch (const ValidationError& e) {
      reject(e.what());
      return;
    }
    sim_.set_vois(vois);
    scene_.vois = std::move(vois);
    scene_changed();
  };

  switch (c.kind) {
    case Kind::steer:
      steering_ = c.steering;
      break;
    case Kind::set_omega:
      sim_.set_omega(c.value);
      scene_.config.omega = c.value;
      scene_changed();
      break;
    case Kind::add_voi: {
      if (find(c.voi.id) != scene_.vois.end()) return reject("duplicate VOI id '" + c.voi.id + "'");
      std::vector<Voi> vois = scene_.vois;
      vois.push_back(c.voi);
      commit(std::move(vois));
      break;
    }
    case Kind::move_voi: {
      const auto it = find(c.voi.id);
      if (it == scene_.vois.end()) return reject("no VOI '" + c.voi.id + "'");
      std::vector<Voi> vois = scene_.vois;
      vois[static_cast<std::size_t>(it - scene_.vois.begin())].position = c.voi.position;
      commit(std::move(vois));
      break;
    }
    case Kind::remove_voi: {
      const auto it = find(c.voi.id);
      if (it == scene_.vois.end()) return reject("no VOI '" + c.voi.id + "'");
      if (scene_.vois.size() == 1) return reject("cannot remove the last VOI");
      std::vector<Voi> vois = scene_.vois;
      vois.erase(vois.begin() + (it - scene_.vois.begin()));
      commit(std::move(vois));
      break;
    }
    case Kind::set_prior: {
      const auto it = find(c.voi.id);
      if (it == scene_.vois.end()) return reject("no VOI '" + c.voi.id + "'");
      std::vector<Voi> vois = scene_.vois;
      vois[static_cast<std::size_t>(it - scene_.vois.begin())].prior = c.value;
      commit(std::move(vois));
      break;
    }
    case Kind::pause:
      paused_ = true;
      break;
    case Kind::resume:
      paused_ = false;
      break;
    case Kind::reset: {
      if (writer_) {
        warn("recording stopped: the session was reset");
        stop_recording();
      }
      if (!c.seed) {
        restart(initial_);
        break;
      }
      const int n = c.distractors.value_or(
          std::clamp(static_cast<int>(scene_.vois.size()) - 1, 0, kMaxDistractors));
      try {
        const TrialSpec spec = generate_trial(*c.seed, n, scene_.arena);
        restart(scenario_from_trial(spec, scene_.arena, scene_.config));
      } catch (const std::exception& e) {
        reject(e.what());
      }
      break;
    }
    case Kind::estop:
      sim_.latch_estop();
      break;
    case Kind::release_estop:
      sim_.release_estop();
      break;
    case Kind::set_tracking_lost:
      tracking_lost_ = c.flag;
      break;
    case Kind::record_start: {
      if (!record_dir_) return reject("recording is not enabled on this server");
      if (writer_) return reject("already recording");
      const auto path = *record_dir_ / ("session-" + std::to_string(++recordings_) + ".jsonl");
      try {
        start_recording(path);
      } catch (const std::exception& e) {
        warn(std::string("recording failed: ") + e.what());
      }
      break;
    }
    case Kind::record_stop:
      stop_recording();
      break;
  }
}

void Session::step() {
  while (!inbox_.empty()) {
    const Command c = std::move(inbox_.front());
    inbox_.pop_front();
    apply(c);
  }
  if (paused_) return;

  const SimConfig& config = sim_.config();
  ++steps_;
  if (!tracking_lost_) {
    user_.pose.position = clamp_to_arena(user_.pose.position + steering_.velocity * config.dt,
                                         Arena{scene_.arena.width, scene_.arena.length, 0.0});
    user_.pose.heading = normalize_angle(user_.pose.heading + steering_.heading_rate * config.dt);
  }
  user_.tracked = !tracking_lost_;
  user_.time = static_cast<double>(steps_) * config.dt;

  const bool estop = sim_.robot().estop_latched;
  const Frame& frame = sim_.step(user_);
  monitor_.observe(frame);

  contact_.reset();
  if (user_.tracked) {
    for (const Voi& v : scene_.vois) {
      if (surface_distance(user_.pose.position, v) <= config.contact_reach + 1e-9) {
        const double d = distance(frame.robot.position, v.physical_position());
        contact_ = ContactInfo{v.id, d, d <= config.success_distance};
        break;
      }
    }
  }

  if (writer_) {
    try {
      writer_->append(trace_frame(frame, estop));
    } catch (const std::exception& e) {
      warn(std::string("recording stopped: ") + e.what());
      writer_.reset();
    }
  }
}

Tick Session::tick() const {
  Tick t;
  t.step = steps_;
  t.t = static_cast<double>(steps_) * sim_.config().dt;
  t.paused = paused_;
  t.recording = recording();
  t.arena = scene_.arena;
  t.omega = sim_.config().omega;
  t.vois = scene_.vois;
  t.target = scene_.target;
  t.frame = sim_.last();
  if (steps_ == 0) {
    t.frame.user = user_;
    t.frame.obstacle = user_obstacle(user_, scene_.vois, sim_.config());
  }
  t.min_clearance = monitor_.min_user_proxy_clearance();
  t.last_detection = monitor_.last_detection();
  t.contact = contact_;
  if (monitor_.contacted()) t.trial = monitor_.result();
  return t;
}

std::vector<std::string> Session::take_outbox() {
  std::vector<std::string> out;
  out.swap(outbox_);
  return out;
}

Scenario Session::snapshot() const {
  Scenario s = scene_;
  s.config = sim_.config();
  s.user_start = user_.pose;
  s.robot_start = sim_.robot().position;
  s.walker.reset();
  s.initial_state = sim_.state();
  return s;
}

void Session::start_recording(const std::filesystem::path& trace) {
  stop_recording();
  const Scenario snap = snapshot();
  save_scenario(snapshot_path(trace), snap);
  writer_ = std::make_unique<TraceWriter>(trace);
  restart_monitor();
}

void Session::stop_recording() { writer_.reset(); }

std::optional<std::filesystem::path> Session::recording_path() const {
  if (!writer_) return std::nullopt;
  return writer_->path();
}

TrialResult replay_recording(const Scenario& scenario, std::vector<TraceFrame> frames,
                             bool record_frames) {
  SimConfig config = scenario.config;
  const double span = frames.empty() ? 0.0 : frames.back().t;
  config.trial_timeout = std::max(config.trial_timeout, span + 1.0) +
                         static_cast<double>(frames.size()) * config.dt;
  TraceSource source(std::move(frames));
  TrialOptions options;
  options.record_frames = record_frames;
  options.target_id = scenario.target;
  options.initial_state = scenario.initial_state;
  return run_trial(scenario.arena, scenario.vois, scenario.robot_start, source, config, options);
}

}  // namespace encounter
