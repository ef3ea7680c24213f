#pragma once
// Teleop wire protocol and the simulation side of the bridge. The network
// code (teleop_server.hpp) only touches a TeleopSession through put() and the
// snapshot it returns from tick().

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fbench/dataset.hpp"
#include "fbench/env.hpp"
#include "fbench/json_util.hpp"

namespace fbench {

inline constexpr int kTeleopProtocolVersion = 1;

struct PartSnapshot {
  std::string id;
  Pose pose;
  PartStatus status = PartStatus::Free;
  double footprint_radius = 0.0;

  bool operator==(const PartSnapshot&) const = default;
};

struct Snapshot {
  std::int64_t tick = 0;
  Pose ee;
  double gripper_width = 0.0;
  int held_part = -1;
  std::vector<PartSnapshot> parts;
  int phase = 0;
  int phase_count = 0;
  int reward_total = 0;
  bool recording = false;
  bool done = false;
  std::string furniture;

  bool operator==(const Snapshot&) const = default;
};

enum class Control { None, Reset, StartRecord, StopRecord };

struct Command {
  Vec3 delta_position = Vec3::Zero();
  double wrist_yaw_delta = 0.0;  // rad about the gripper axis
  int gripper = 0;               // -1 open, 0 hold, +1 close
  Control control = Control::None;

  bool operator==(const Command&) const = default;
};

inline std::string to_string(Control c) {
  switch (c) {
    case Control::None: return "none";
    case Control::Reset: return "reset";
    case Control::StartRecord: return "start_record";
    case Control::StopRecord: return "stop_record";
  }
  return "?";
}

inline PartStatus part_status_from_string(const std::string& s, const std::string& where) {
  for (auto v : {PartStatus::Free, PartStatus::Grasped, PartStatus::Inserted, PartStatus::Assembled})
    if (to_string(v) == s) return v;
  throw FormatError(where, "unknown part status '" + s + "'");
}

// ---------------------------------------------------------------------------

inline std::string encode_snapshot(const Snapshot& s) {
  Json parts = Json::array();
  for (const PartSnapshot& p : s.parts)
    parts.push_back({{"id", p.id},
                     {"pose", pose_to_json(p.pose)},
                     {"status", to_string(p.status)},
                     {"footprint_radius", p.footprint_radius}});
  return Json{{"type", "snapshot"},
              {"version", kTeleopProtocolVersion},
              {"tick", s.tick},
              {"ee", pose_to_json(s.ee)},
              {"gripper_width", s.gripper_width},
              {"held_part", s.held_part},
              {"parts", parts},
              {"phase", s.phase},
              {"phase_count", s.phase_count},
              {"reward_total", s.reward_total},
              {"recording", s.recording},
              {"done", s.done},
              {"furniture", s.furniture}}
      .dump();
}

inline Snapshot decode_snapshot(const std::string& text) {
  const Json j = parse_json_text(text, "snapshot");
  const std::string w = "snapshot";
  require_keys(j, {"type", "version", "tick", "ee", "gripper_width", "held_part", "parts", "phase", "phase_count",
                   "reward_total", "recording", "done", "furniture"},
               w);
  if (get_string(j, "type", w) != "snapshot") throw FormatError(w + "/type", "expected 'snapshot'");
  if (get_int(j, "version", w) != kTeleopProtocolVersion) throw FormatError(w + "/version", "unsupported version");
  Snapshot s;
  s.tick = field(j, "tick", w).get<std::int64_t>();
  s.ee = pose_from_json(field(j, "ee", w), w + "/ee");
  s.gripper_width = get_number(j, "gripper_width", w);
  s.held_part = get_int(j, "held_part", w);
  const Json& parts = field(j, "parts", w);
  if (!parts.is_array()) throw FormatError(w + "/parts", "expected an array");
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const std::string pw = w + "/parts/" + std::to_string(k);
    require_keys(parts[k], {"id", "pose", "status", "footprint_radius"}, pw);
    s.parts.push_back({get_string(parts[k], "id", pw), pose_from_json(field(parts[k], "pose", pw), pw + "/pose"),
                       part_status_from_string(get_string(parts[k], "status", pw), pw + "/status"),
                       get_number(parts[k], "footprint_radius", pw)});
  }
  s.phase = get_int(j, "phase", w);
  s.phase_count = get_int(j, "phase_count", w);
  s.reward_total = get_int(j, "reward_total", w);
  s.recording = field(j, "recording", w).get<bool>();
  s.done = field(j, "done", w).get<bool>();
  s.furniture = get_string(j, "furniture", w);
  return s;
}

inline std::string encode_command(const Command& c) {
  return Json{{"type", "command"},
              {"delta_position", vec3_to_json(c.delta_position)},
              {"wrist_yaw_delta", c.wrist_yaw_delta},
              {"gripper", c.gripper},
              {"control", to_string(c.control)}}
      .dump();
}

/// Missing fields default to zero / "none", so `{"type":"command"}` is the
/// zero command.
inline Command decode_command(const std::string& text) {
  const Json j = parse_json_text(text, "command");
  const std::string w = "command";
  require_keys(j, {"type", "delta_position", "wrist_yaw_delta", "gripper", "control"}, w);
  if (j.contains("type") && get_string(j, "type", w) != "command") throw FormatError(w + "/type", "expected 'command'");
  Command c;
  if (j.contains("delta_position")) {
    c.delta_position = vec3_from_json(j["delta_position"], w + "/delta_position");
    if ((c.delta_position.array().abs() > 1.0).any()) throw FormatError(w + "/delta_position", "component outside [-1, 1]");
  }
  if (j.contains("wrist_yaw_delta")) {
    c.wrist_yaw_delta = get_number(j, "wrist_yaw_delta", w);
    if (!(std::abs(c.wrist_yaw_delta) <= kPi)) throw FormatError(w + "/wrist_yaw_delta", "outside [-pi, pi]");
  }
  if (j.contains("gripper")) {
    c.gripper = get_int(j, "gripper", w);
    if (c.gripper < -1 || c.gripper > 1) throw FormatError(w + "/gripper", "must be -1, 0 or 1");
  }
  if (j.contains("control")) {
    const std::string s = get_string(j, "control", w);
    bool known = false;
    for (auto v : {Control::None, Control::Reset, Control::StartRecord, Control::StopRecord})
      if (to_string(v) == s) c.control = v, known = true;
    if (!known) throw FormatError(w + "/control", "unknown control '" + s + "'");
  }
  return c;
}

/// Wrist yaw turns about the gripper's own z axis; the orientation delta is
/// EE-local, so that is rot_z.
inline Action command_to_action(const Command& c) {
  Action a;
  a.delta_position = c.delta_position;
  a.delta_orientation = rot_z(c.wrist_yaw_delta);
  a.gripper = static_cast<double>(c.gripper);
  return a;
}

inline std::string encode_error(const std::string& message) {
  return Json{{"type", "error"}, {"message", message}}.dump();
}

inline Snapshot make_snapshot(const Env& env, bool recording) {
  Snapshot s;
  const WorldState& w = env.world();
  s.tick = w.tick;
  s.ee = w.ee.pose;
  s.gripper_width = w.ee.gripper_width;
  s.held_part = w.ee.held_part;
  for (int k = 0; k < env.graph().n_parts(); ++k)
    s.parts.push_back({env.graph().parts[k].id, w.parts[k].pose, w.parts[k].status,
                       env.graph().parts[k].footprint_radius});
  s.phase = env.phase().completed;
  s.phase_count = static_cast<int>(env.graph().phases.size());
  s.reward_total = env.reward_total();
  s.recording = recording;
  s.done = env.done();
  s.furniture = env.graph().furniture_id;
  return s;
}

// ---------------------------------------------------------------------------

/// Simulation side of the bridge. put() may be called from any thread;
/// tick() belongs to the simulation loop and never waits on the network.
///
/// Motion is last-write-wins. A control (reset / start / stop record) is
/// latched separately so a motion command arriving in the same tick cannot
/// erase it; among controls the latest one wins as well.
class TeleopSession {
 public:
  TeleopSession(RunConfig cfg, std::uint64_t first_seed, std::filesystem::path out_dir)
      : env_(cfg), next_seed_(first_seed), out_dir_(std::move(out_dir)) {
    first_obs_ = env_.reset(next_seed_++);
  }

  void put(const Command& c) {
    std::lock_guard lock(mu_);
    Command motion = c;
    motion.control = Control::None;
    pending_ = motion;
    if (c.control != Control::None) control_ = c.control;
  }

  /// One loop iteration: apply a latched control, else step with the latest
  /// command (zero if none arrived). Returns the snapshot to publish.
  Snapshot tick() {
    std::optional<Command> cmd;
    std::optional<Control> ctl;
    {
      std::lock_guard lock(mu_);
      cmd.swap(pending_);
      ctl.swap(control_);
    }
    if (ctl == Control::Reset) {
      finish_recording();
      first_obs_ = env_.reset(next_seed_++);
      return make_snapshot(env_, false);
    }
    if (ctl == Control::StartRecord) {
      // A recording always starts from a fresh reset so it can be replayed.
      finish_recording();
      first_obs_ = env_.reset(next_seed_++);
      recorder_.emplace(env_, first_obs_, Operator::Teleop);
      return make_snapshot(env_, true);
    }
    if (ctl == Control::StopRecord) {
      finish_recording();
      return make_snapshot(env_, false);
    }
    if (!env_.done()) {
      const Action a = cmd ? command_to_action(*cmd) : Action::zero();
      const StepResult r = env_.step(a);
      if (recorder_) recorder_->add(a, r, env_);
      if (env_.done()) finish_recording();
    }
    return make_snapshot(env_, recorder_.has_value());
  }

  const Env& env() const { return env_; }
  const std::vector<std::filesystem::path>& written() const { return written_; }
  bool recording() const { return recorder_.has_value(); }

 private:
  void finish_recording() {
    if (!recorder_) return;
    if (recorder_->size() > 0) {
      const Episode ep = recorder_->finish(env_);
      std::filesystem::create_directories(out_dir_);
      const auto path = out_dir_ / ("teleop_" + env_.config().furniture + "_seed" + std::to_string(ep.header.seed) +
                                    "_" + std::to_string(written_.size()) + ".jsonl");
      write_episode(ep, path);
      written_.push_back(path);
    }
    recorder_.reset();
  }

  std::mutex mu_;
  std::optional<Command> pending_;
  std::optional<Control> control_;
  Env env_;
  std::uint64_t next_seed_;
  std::filesystem::path out_dir_;
  Observation first_obs_;
  std::optional<EpisodeRecorder> recorder_;
  std::vector<std::filesystem::path> written_;
};

}  // namespace fbench
