#pragma once
// Run configuration: every knob of one evaluation or collection run, as one
// JSON document. Missing keys keep their defaults; unknown keys are errors.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fbench/controller.hpp"
#include "fbench/init_sampler.hpp"
#include "fbench/json_util.hpp"
#include "fbench/perception.hpp"
#include "fbench/reward.hpp"
#include "fbench/termination.hpp"
#include "fbench/world.hpp"

namespace fbench {

inline constexpr int kRunConfigFormatVersion = 1;

struct ObservationChannels {
  bool fused_part_poses = false;  // privileged; off for policy parity
  bool image = false;             // rendered front view, preprocessed to 224x224

  bool operator==(const ObservationChannels&) const = default;
};

struct RunConfig {
  std::string furniture = "one_leg";
  Level level = Level::Low;
  std::vector<std::uint64_t> seeds = {0};
  bool eval_mode = false;
  ControllerConfig controller;
  WorldConfig plant;
  NoiseModel noise;
  FilterConfig filter;
  RewardConfig reward;
  TerminationConfig termination;
  InitConfig init;
  ObservationChannels observation_channels;

  void validate() const {
    controller.validate();
    noise.validate();
    reward.validate();
    termination.validate();
    init.validate();
    if (!(plant.mass > 0 && plant.inertia > 0)) throw std::invalid_argument("plant mass and inertia must be positive");
    if (filter.history_size < 1) throw std::invalid_argument("filter history_size must be >= 1");
  }

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline Json vec6_to_json(const Vec6& v) { return Json(std::vector<double>(v.data(), v.data() + 6)); }

inline Vec6 vec6_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 6) throw FormatError(where, "expected an array of 6 numbers");
  Vec6 v;
  for (int i = 0; i < 6; ++i) v[i] = number_at(j[i], where + "/" + std::to_string(i));
  return v;
}

/// Reads j[key] into `out` when present.
template <class T>
void read_opt(const Json& j, const char* key, T& out, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  const std::string w = where + "/" + key;
  if constexpr (std::is_same_v<T, bool>) {
    if (!it->is_boolean()) throw FormatError(w, "expected a boolean");
    out = it->template get<bool>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!it->is_number_integer()) throw FormatError(w, "expected an integer");
    out = it->template get<T>();
  } else if constexpr (std::is_floating_point_v<T>) {
    out = number_at(*it, w);
  } else if constexpr (std::is_same_v<T, Vec6>) {
    out = vec6_from_json(*it, w);
  } else if constexpr (std::is_same_v<T, Vec3>) {
    out = vec3_from_json(*it, w);
  } else {
    static_assert(sizeof(T) == 0, "unsupported field type");
  }
}

}  // namespace detail

inline Json to_json(const ControllerConfig& c) {
  return {{"action_frequency", c.action_frequency},
          {"torque_frequency", c.torque_frequency},
          {"lowlevel_frequency", c.lowlevel_frequency},
          {"torque_repeat", c.torque_repeat},
          {"delta_position_clip", c.delta_position_clip},
          {"delta_rotation_clip", c.delta_rotation_clip},
          {"gripper_threshold", c.gripper_threshold},
          {"kp", detail::vec6_to_json(c.kp)},
          {"kd", detail::vec6_to_json(c.kd)},
          {"joint_damping", c.joint_damping},
          {"force_bound", c.force_bound},
          {"torque_bound", c.torque_bound}};
}

inline ControllerConfig controller_from_json(const Json& j, const std::string& w) {
  require_keys(j, {"action_frequency", "torque_frequency", "lowlevel_frequency", "torque_repeat", "delta_position_clip",
                   "delta_rotation_clip", "gripper_threshold", "kp", "kd", "joint_damping", "force_bound",
                   "torque_bound"},
               w);
  ControllerConfig c;
  using detail::read_opt;
  read_opt(j, "action_frequency", c.action_frequency, w);
  read_opt(j, "torque_frequency", c.torque_frequency, w);
  read_opt(j, "lowlevel_frequency", c.lowlevel_frequency, w);
  read_opt(j, "torque_repeat", c.torque_repeat, w);
  read_opt(j, "delta_position_clip", c.delta_position_clip, w);
  read_opt(j, "delta_rotation_clip", c.delta_rotation_clip, w);
  read_opt(j, "gripper_threshold", c.gripper_threshold, w);
  read_opt(j, "kp", c.kp, w);
  read_opt(j, "kd", c.kd, w);
  read_opt(j, "joint_damping", c.joint_damping, w);
  read_opt(j, "force_bound", c.force_bound, w);
  read_opt(j, "torque_bound", c.torque_bound, w);
  return c;
}

// Damping and force bounds belong to the controller section; the plant copies them.
inline Json to_json(const WorldConfig& p) {
  return {{"mass", p.mass},
          {"inertia", p.inertia},
          {"max_gripper_width", p.max_gripper_width},
          {"gripper_speed", p.gripper_speed},
          {"grasp_radius", p.grasp_radius},
          {"insert_position_tolerance", p.insert_position_tolerance},
          {"insert_angle_tolerance", p.insert_angle_tolerance},
          {"grasp_yaw_budget", p.grasp_yaw_budget}};
}

inline WorldConfig plant_from_json(const Json& j, const std::string& w) {
  require_keys(j, {"mass", "inertia", "max_gripper_width", "gripper_speed", "grasp_radius", "insert_position_tolerance",
                   "insert_angle_tolerance", "grasp_yaw_budget"},
               w);
  WorldConfig p;
  using detail::read_opt;
  read_opt(j, "mass", p.mass, w);
  read_opt(j, "inertia", p.inertia, w);
  read_opt(j, "max_gripper_width", p.max_gripper_width, w);
  read_opt(j, "gripper_speed", p.gripper_speed, w);
  read_opt(j, "grasp_radius", p.grasp_radius, w);
  read_opt(j, "insert_position_tolerance", p.insert_position_tolerance, w);
  read_opt(j, "insert_angle_tolerance", p.insert_angle_tolerance, w);
  read_opt(j, "grasp_yaw_budget", p.grasp_yaw_budget, w);
  return p;
}

inline Json to_json(const NoiseModel& n) {
  return {{"translation_sigma", n.translation_sigma},
          {"rotation_sigma", n.rotation_sigma},
          {"dropout_probability", n.dropout_probability},
          {"flip_probability", n.flip_probability}};
}

inline NoiseModel noise_from_json(const Json& j, const std::string& w) {
  require_keys(j, {"translation_sigma", "rotation_sigma", "dropout_probability", "flip_probability"}, w);
  NoiseModel n;
  using detail::read_opt;
  read_opt(j, "translation_sigma", n.translation_sigma, w);
  read_opt(j, "rotation_sigma", n.rotation_sigma, w);
  read_opt(j, "dropout_probability", n.dropout_probability, w);
  read_opt(j, "flip_probability", n.flip_probability, w);
  return n;
}

inline Json to_json(const FilterConfig& f) {
  return {{"history_size", f.history_size},
          {"translation_threshold", f.translation_threshold},
          {"rotation_threshold", f.rotation_threshold},
          {"reacquire_count", f.reacquire_count},
          {"staleness_cap", f.staleness_cap},
          {"warmup_frames", f.warmup_frames}};
}

inline FilterConfig filter_from_json(const Json& j, const std::string& w) {
  require_keys(j, {"history_size", "translation_threshold", "rotation_threshold", "reacquire_count", "staleness_cap",
                   "warmup_frames"},
               w);
  FilterConfig f;
  using detail::read_opt;
  read_opt(j, "history_size", f.history_size, w);
  read_opt(j, "translation_threshold", f.translation_threshold, w);
  read_opt(j, "rotation_threshold", f.rotation_threshold, w);
  read_opt(j, "reacquire_count", f.reacquire_count, w);
  read_opt(j, "staleness_cap", f.staleness_cap, w);
  read_opt(j, "warmup_frames", f.warmup_frames, w);
  return f;
}

inline Json to_json(const RewardConfig& r) {
  return {{"column_cosine_threshold", r.column_cosine_threshold},
          {"per_axis_distance_threshold", r.per_axis_distance_threshold},
          {"persistence", r.persistence}};
}

inline RewardConfig reward_from_json(const Json& j, const std::string& w) {
  require_keys(j, {"column_cosine_threshold", "per_axis_distance_threshold", "persistence"}, w);
  RewardConfig r;
  using detail::read_opt;
  read_opt(j, "column_cosine_threshold", r.column_cosine_threshold, w);
  read_opt(j, "per_axis_distance_threshold", r.per_axis_distance_threshold, w);
  read_opt(j, "persistence", r.persistence, w);
  return r;
}

inline Json to_json(const TerminationConfig& t) {
  return {{"no_motion_seconds", t.no_motion_seconds},
          {"motion_epsilon", t.motion_epsilon},
          {"max_steps_per_skill", t.max_steps_per_skill},
          {"max_steps_total", t.max_steps_total},
          {"unsafe_bounds", {{"min", vec3_to_json(t.unsafe_bounds.min)}, {"max", vec3_to_json(t.unsafe_bounds.max)}}}};
}

inline TerminationConfig termination_from_json(const Json& j, const std::string& w) {
  require_keys(j, {"no_motion_seconds", "motion_epsilon", "max_steps_per_skill", "max_steps_total", "unsafe_bounds"}, w);
  TerminationConfig t;
  using detail::read_opt;
  read_opt(j, "no_motion_seconds", t.no_motion_seconds, w);
  read_opt(j, "motion_epsilon", t.motion_epsilon, w);
  read_opt(j, "max_steps_per_skill", t.max_steps_per_skill, w);
  read_opt(j, "max_steps_total", t.max_steps_total, w);
  if (auto it = j.find("unsafe_bounds"); it != j.end()) {
    const std::string bw = w + "/unsafe_bounds";
    require_keys(*it, {"min", "max"}, bw);
    read_opt(*it, "min", t.unsafe_bounds.min, bw);
    read_opt(*it, "max", t.unsafe_bounds.max, bw);
  }
  return t;
}

inline Json to_json(const InitConfig& c) {
  return {{"low_translation_sigma", c.low_translation_sigma},
          {"low_rotation_sigma", c.low_rotation_sigma},
          {"low_truncation", c.low_truncation},
          {"medium_translation_bound", c.medium_translation_bound},
          {"medium_rotation_bound", c.medium_rotation_bound},
          {"guide_translation_tolerance", c.guide_translation_tolerance},
          {"guide_rotation_tolerance", c.guide_rotation_tolerance},
          {"max_attempts", c.max_attempts},
          {"skill_low_translation", c.skill_low_translation},
          {"skill_low_rotation", c.skill_low_rotation},
          {"skill_medium_translation", c.skill_medium_translation},
          {"skill_medium_rotation", c.skill_medium_rotation}};
}

inline InitConfig init_from_json(const Json& j, const std::string& w) {
  require_keys(j, {"low_translation_sigma", "low_rotation_sigma", "low_truncation", "medium_translation_bound",
                   "medium_rotation_bound", "guide_translation_tolerance", "guide_rotation_tolerance", "max_attempts",
                   "skill_low_translation", "skill_low_rotation", "skill_medium_translation", "skill_medium_rotation"},
               w);
  InitConfig c;
  using detail::read_opt;
  read_opt(j, "low_translation_sigma", c.low_translation_sigma, w);
  read_opt(j, "low_rotation_sigma", c.low_rotation_sigma, w);
  read_opt(j, "low_truncation", c.low_truncation, w);
  read_opt(j, "medium_translation_bound", c.medium_translation_bound, w);
  read_opt(j, "medium_rotation_bound", c.medium_rotation_bound, w);
  read_opt(j, "guide_translation_tolerance", c.guide_translation_tolerance, w);
  read_opt(j, "guide_rotation_tolerance", c.guide_rotation_tolerance, w);
  read_opt(j, "max_attempts", c.max_attempts, w);
  read_opt(j, "skill_low_translation", c.skill_low_translation, w);
  read_opt(j, "skill_low_rotation", c.skill_low_rotation, w);
  read_opt(j, "skill_medium_translation", c.skill_medium_translation, w);
  read_opt(j, "skill_medium_rotation", c.skill_medium_rotation, w);
  return c;
}

inline Json to_json(const RunConfig& c) {
  return {{"format_version", kRunConfigFormatVersion},
          {"furniture", c.furniture},
          {"level", to_string(c.level)},
          {"seeds", c.seeds},
          {"eval_mode", c.eval_mode},
          {"controller", to_json(c.controller)},
          {"plant", to_json(c.plant)},
          {"noise", to_json(c.noise)},
          {"filter", to_json(c.filter)},
          {"reward", to_json(c.reward)},
          {"termination", to_json(c.termination)},
          {"init", to_json(c.init)},
          {"observation_channels",
           {{"fused_part_poses", c.observation_channels.fused_part_poses},
            {"image", c.observation_channels.image}}}};
}

inline RunConfig run_config_from_json(const Json& j) {
  const std::string w;
  require_keys(j, {"format_version", "furniture", "level", "seeds", "eval_mode", "controller", "plant", "noise",
                   "filter", "reward", "termination", "init", "observation_channels"},
               w);
  if (get_int(j, "format_version", w) != kRunConfigFormatVersion)
    throw FormatError("/format_version", "unsupported run-config format_version");
  RunConfig c;
  if (j.contains("furniture")) c.furniture = get_string(j, "furniture", w);
  if (j.contains("level")) {
    try {
      c.level = level_from_string(get_string(j, "level", w));
    } catch (const std::invalid_argument& e) {
      throw FormatError("/level", e.what());
    }
  }
  if (auto it = j.find("seeds"); it != j.end()) {
    if (!it->is_array()) throw FormatError("/seeds", "expected an array of integers");
    c.seeds.clear();
    for (std::size_t i = 0; i < it->size(); ++i) {
      if (!(*it)[i].is_number_unsigned()) throw FormatError("/seeds/" + std::to_string(i), "expected a non-negative integer");
      c.seeds.push_back((*it)[i].get<std::uint64_t>());
    }
  }
  detail::read_opt(j, "eval_mode", c.eval_mode, w);
  if (j.contains("controller")) c.controller = controller_from_json(j["controller"], "/controller");
  if (j.contains("plant")) c.plant = plant_from_json(j["plant"], "/plant");
  if (j.contains("noise")) c.noise = noise_from_json(j["noise"], "/noise");
  if (j.contains("filter")) c.filter = filter_from_json(j["filter"], "/filter");
  if (j.contains("reward")) c.reward = reward_from_json(j["reward"], "/reward");
  if (j.contains("termination")) c.termination = termination_from_json(j["termination"], "/termination");
  if (j.contains("init")) c.init = init_from_json(j["init"], "/init");
  if (auto it = j.find("observation_channels"); it != j.end()) {
    require_keys(*it, {"fused_part_poses", "image"}, "/observation_channels");
    detail::read_opt(*it, "fused_part_poses", c.observation_channels.fused_part_poses, "/observation_channels");
    detail::read_opt(*it, "image", c.observation_channels.image, "/observation_channels");
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError("", e.what());
  }
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return run_config_from_json(parse_json_text(text, path.string()));
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path.string(), 0) == 0) throw;
    throw FormatError(path.string(), msg);
  }
}

}  // namespace fbench
