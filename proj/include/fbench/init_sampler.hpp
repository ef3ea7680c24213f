#pragma once
// Initial part layouts for the three randomness levels, skill-evaluation
// start states, and the placement guide check.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbench/catalog.hpp"
#include "fbench/geometry.hpp"
#include "fbench/rng.hpp"
#include "fbench/workspace.hpp"
#include "fbench/world.hpp"

namespace fbench {

enum class Level { Low, Medium, High };

inline std::string to_string(Level l) {
  switch (l) {
    case Level::Low: return "low";
    case Level::Medium: return "medium";
    case Level::High: return "high";
  }
  return "?";
}

inline Level level_from_string(const std::string& s) {
  if (s == "low") return Level::Low;
  if (s == "med" || s == "medium") return Level::Medium;
  if (s == "high") return Level::High;
  throw std::invalid_argument("unknown randomness level '" + s + "' (expected low, med, high)");
}

struct InitConfig {
  double low_translation_sigma = 0.005;
  double low_rotation_sigma = deg2rad(5.0);
  double low_truncation = 2.0;  // in sigmas
  double medium_translation_bound = 0.05;
  double medium_rotation_bound = kPi / 4;
  double guide_translation_tolerance = 0.010;
  double guide_rotation_tolerance = deg2rad(10.0);
  int max_attempts = 10000;
  // EE perturbation of skill start states, per level.
  double skill_low_translation = 0.005;
  double skill_low_rotation = deg2rad(5.0);
  double skill_medium_translation = 0.05;
  double skill_medium_rotation = deg2rad(15.0);

  void validate() const {
    for (double v : {low_translation_sigma, low_rotation_sigma, low_truncation, medium_translation_bound,
                     medium_rotation_bound, guide_translation_tolerance, guide_rotation_tolerance,
                     skill_low_translation, skill_low_rotation, skill_medium_translation, skill_medium_rotation})
      if (!(v >= 0)) throw std::invalid_argument("init bounds must be non-negative");
    if (max_attempts < 1) throw std::invalid_argument("max_attempts must be positive");
  }

  bool operator==(const InitConfig&) const = default;
};

class WorkspaceTooCrowded : public std::runtime_error {
 public:
  WorkspaceTooCrowded() : std::runtime_error("workspace too crowded") {}
};

namespace detail {

inline Pose jittered(const Pose& base, double dx, double dy, double dyaw) {
  return make_pose(base.position + Vec3(dx, dy, 0.0), rot_z(dyaw) * base.orientation);
}

inline std::vector<Pose> sample_high(const AssemblyGraph& g, const InitConfig& cfg, Rng& rng, const Workspace& ws) {
  int attempts = 0;
  std::vector<Pose> out;
  for (int k = 0; k < g.n_parts(); ++k) {
    const double r = g.parts[k].footprint_radius;
    for (;;) {
      if (++attempts > cfg.max_attempts) throw WorkspaceTooCrowded();
      const double x = rng.uniform(ws.table.xmin + r, ws.table.xmax - r);
      const double y = rng.uniform(ws.table.ymin + r, ws.table.ymax - r);
      const double yaw = rng.uniform(-kPi, kPi);
      if (ws.circle_hits_wall(x, y, r)) continue;
      bool clear = true;
      for (int j = 0; j < k && clear; ++j)
        clear = std::hypot(x - out[j].position.x(), y - out[j].position.y()) >= r + g.parts[j].footprint_radius;
      if (!clear) continue;
      out.push_back(make_pose(Vec3(x, y, ws.table_height + g.parts[k].rest_height()), rot_z(yaw)));
      break;
    }
  }
  return out;
}

}  // namespace detail

inline std::vector<Pose> sample_initial_poses(const AssemblyGraph& g, Level level, const InitConfig& cfg,
                                              std::uint64_t seed, bool eval_mode,
                                              const Workspace& ws = default_workspace()) {
  Rng rng = Rng::stream(seed, 2);
  std::vector<Pose> out;
  switch (level) {
    case Level::Low:
      for (const Pose& b : g.base_poses) {
        const double dx = rng.truncated_normal(cfg.low_translation_sigma, cfg.low_truncation);
        const double dy = rng.truncated_normal(cfg.low_translation_sigma, cfg.low_truncation);
        const double dyaw = rng.truncated_normal(cfg.low_rotation_sigma, cfg.low_truncation);
        out.push_back(cfg.low_translation_sigma == 0 && cfg.low_rotation_sigma == 0 ? b
                                                                                    : detail::jittered(b, dx, dy, dyaw));
      }
      return out;
    case Level::Medium: {
      const double t = cfg.medium_translation_bound, a = cfg.medium_rotation_bound;
      for (const Pose& b : g.base_poses) {
        const double dx = rng.uniform(-t, t), dy = rng.uniform(-t, t), dyaw = rng.uniform(-a, a);
        out.push_back(detail::jittered(b, dx, dy, dyaw));
      }
      return out;
    }
    case Level::High:
      if (eval_mode) return g.high_eval_configs.at(seed % 3);
      return detail::sample_high(g, cfg, rng, ws);
  }
  return out;
}

struct SkillState {
  std::vector<Pose> part_poses;
  Pose ee_pose;
};

/// Random draws for a skill start; all-zero draws reproduce the reference.
struct SkillJitter {
  Vec3 ee_translation = Vec3::Zero();
  Vec3 ee_rotation = Vec3::Zero();  // rotation vector, world frame
  std::vector<Vec3> parts;          // (dx, dy, dyaw) per part
};

inline SkillJitter draw_skill_jitter(const AssemblyGraph& g, Level level, const InitConfig& cfg, Rng& rng) {
  if (level == Level::High) throw std::invalid_argument("skill starts exist for low and medium only");
  const bool med = level == Level::Medium;
  const double t = med ? cfg.skill_medium_translation : cfg.skill_low_translation;
  const double a = med ? cfg.skill_medium_rotation : cfg.skill_low_rotation;
  SkillJitter j;
  j.ee_translation = Vec3(rng.uniform(-t, t), rng.uniform(-t, t), rng.uniform(-t, t));
  j.ee_rotation = rng.unit_vector() * rng.uniform(0.0, a);
  j.parts.assign(g.n_parts(), Vec3::Zero());
  if (med) {
    for (Vec3& p : j.parts)
      p = Vec3(rng.uniform(-cfg.medium_translation_bound, cfg.medium_translation_bound),
               rng.uniform(-cfg.medium_translation_bound, cfg.medium_translation_bound),
               rng.uniform(-cfg.medium_rotation_bound, cfg.medium_rotation_bound));
  }
  return j;
}

inline SkillState apply_skill_jitter(const SkillStart& ref, const SkillJitter& j) {
  SkillState s{ref.part_poses, ref.ee_pose};
  if (!j.ee_translation.isZero(0.0) || !j.ee_rotation.isZero(0.0))
    s.ee_pose = make_pose(ref.ee_pose.position + j.ee_translation,
                          from_rotation_vector(j.ee_rotation) * ref.ee_pose.orientation);
  for (std::size_t k = 0; k < j.parts.size() && k < s.part_poses.size(); ++k)
    if (!j.parts[k].isZero(0.0)) s.part_poses[k] = detail::jittered(ref.part_poses[k], j.parts[k].x(), j.parts[k].y(), j.parts[k].z());
  return s;
}

/// skill_index is 1-based.
inline SkillState skill_start_state(const AssemblyGraph& g, int skill_index, Level level, std::uint64_t seed,
                                    const InitConfig& cfg = {}) {
  if (skill_index < 1 || skill_index > static_cast<int>(std::min<std::size_t>(5, g.skill_starts.size())))
    throw std::out_of_range("unknown skill index " + std::to_string(skill_index));
  Rng rng = Rng::stream(seed, 4);
  return apply_skill_jitter(g.skill_starts[skill_index - 1], draw_skill_jitter(g, level, cfg, rng));
}

struct GuideEntry {
  double translation_error = 0.0;
  double rotation_error = 0.0;
  bool matched = false;
};

struct GuideReport {
  std::vector<GuideEntry> parts;
  bool all_matched = false;
};

inline GuideReport init_guide(const std::vector<Pose>& current, const std::vector<Pose>& target,
                              double translation_tolerance, double rotation_tolerance) {
  if (current.size() != target.size()) throw std::invalid_argument("estimate and target counts differ");
  GuideReport r;
  r.all_matched = true;
  for (std::size_t k = 0; k < current.size(); ++k) {
    GuideEntry e;
    e.translation_error = (current[k].position - target[k].position).norm();
    e.rotation_error = geodesic_angle(current[k].orientation, target[k].orientation);
    e.matched = e.translation_error <= translation_tolerance && e.rotation_error <= rotation_tolerance;
    r.all_matched = r.all_matched && e.matched;
    r.parts.push_back(e);
  }
  return r;
}

inline GuideReport init_guide(const std::vector<Pose>& current, const std::vector<Pose>& target,
                              const InitConfig& cfg = {}) {
  return init_guide(current, target, cfg.guide_translation_tolerance, cfg.guide_rotation_tolerance);
}

}  // namespace fbench
