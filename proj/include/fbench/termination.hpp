#pragma once
// Episode termination rules: idle timeout, unsafe EE, per-skill and total
// step limits.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbench/geometry.hpp"

namespace fbench {

struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool contains(const Vec3& p) const { return (p.array() >= min.array()).all() && (p.array() <= max.array()).all(); }
  bool operator==(const Box&) const = default;
};

struct TerminationConfig {
  double no_motion_seconds = 5.0;
  double motion_epsilon = 1e-3;  // m, over the whole window
  int max_steps_per_skill = 350;
  int max_steps_total = 3000;
  // EE box: the table plus a margin, from the table surface to 0.6 m.
  Box unsafe_bounds{Vec3(-0.45, -0.40, 0.0), Vec3(0.45, 0.40, 0.60)};

  /// Idle window length in actions at the given action rate.
  int no_motion_window(double action_frequency) const {
    return static_cast<int>(std::lround(no_motion_seconds * action_frequency));
  }

  void validate() const {
    if (!(no_motion_seconds > 0 && motion_epsilon > 0 && max_steps_per_skill > 0 && max_steps_total > 0))
      throw std::invalid_argument("termination limits must be positive");
    if (!(unsafe_bounds.min.array() < unsafe_bounds.max.array()).all())
      throw std::invalid_argument("unsafe_bounds min must be below max");
  }

  bool operator==(const TerminationConfig&) const = default;
};

enum class TerminationCause { Success, NoMotion, Unsafe, MaxSkill, MaxTotal, PolicyError };

inline std::string to_string(TerminationCause c) {
  switch (c) {
    case TerminationCause::Success: return "success";
    case TerminationCause::NoMotion: return "no_motion";
    case TerminationCause::Unsafe: return "unsafe";
    case TerminationCause::MaxSkill: return "max_skill";
    case TerminationCause::MaxTotal: return "max_total";
    case TerminationCause::PolicyError: return "policy_error";
  }
  return "?";
}

/// What the rules look at. ee_positions[0] is the position after reset and
/// ee_positions[t] the position after action t.
struct TerminationHistory {
  std::vector<Vec3> ee_positions;
  int steps_in_skill = 0;
  int total_steps = 0;
};

/// First triggered cause in the order no_motion, unsafe, max_skill, max_total.
inline std::optional<TerminationCause> check_termination(const TerminationHistory& h, const TerminationConfig& cfg,
                                                         double action_frequency = 10.0) {
  const int window = cfg.no_motion_window(action_frequency);
  const int n = static_cast<int>(h.ee_positions.size());
  if (window > 0 && n > window) {
    const Vec3& anchor = h.ee_positions[n - 1 - window];
    bool idle = true;
    for (int i = n - window; i < n && idle; ++i) idle = (h.ee_positions[i] - anchor).norm() < cfg.motion_epsilon;
    if (idle) return TerminationCause::NoMotion;
  }
  if (n > 0 && !cfg.unsafe_bounds.contains(h.ee_positions.back())) return TerminationCause::Unsafe;
  if (h.steps_in_skill > cfg.max_steps_per_skill) return TerminationCause::MaxSkill;
  if (h.total_steps >= cfg.max_steps_total) return TerminationCause::MaxTotal;
  return std::nullopt;
}

}  // namespace fbench
