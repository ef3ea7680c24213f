#pragma once
// Pair-assembled predicate, once-per-pair sparse reward, and phase tracking.

#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "fbench/catalog.hpp"
#include "fbench/geometry.hpp"
#include "fbench/world.hpp"

namespace fbench {

struct RewardConfig {
  double column_cosine_threshold = 0.96;
  double per_axis_distance_threshold = 0.007;  // m
  int persistence = 1;  // consecutive frames the predicate must hold

  void validate() const {
    if (!(column_cosine_threshold > 0 && column_cosine_threshold <= 1))
      throw std::invalid_argument("column_cosine_threshold must be in (0, 1]");
    if (!(per_axis_distance_threshold > 0)) throw std::invalid_argument("per_axis_distance_threshold must be > 0");
    if (persistence < 1) throw std::invalid_argument("persistence must be >= 1");
  }

  bool operator==(const RewardConfig&) const = default;
};

/// Every column of the two rotation matrices agrees (dot > threshold) and
/// every position axis is within the distance threshold. Both strict.
inline bool is_assembled(const Pose& rel, const Pose& gt, const RewardConfig& cfg = {}) {
  const Mat3 r = to_matrix(rel.orientation);
  const Mat3 g = to_matrix(gt.orientation);
  for (int c = 0; c < 3; ++c)
    if (!(g.col(c).dot(r.col(c)) > cfg.column_cosine_threshold)) return false;
  const Vec3 d = rel.position - gt.position;
  for (int a = 0; a < 3; ++a)
    if (!(std::abs(d[a]) < cfg.per_axis_distance_threshold)) return false;
  return true;
}

struct RewardStep {
  int reward = 0;
  std::set<int> assembled_after;
};

/// Pairs whose two parts both have a pose are tested; the rest keep their status.
inline RewardStep step_reward(const std::set<int>& assembled_before, const std::vector<std::optional<Pose>>& poses,
                              const AssemblyGraph& g, const RewardConfig& cfg = {}) {
  RewardStep out{0, assembled_before};
  for (int k = 0; k < static_cast<int>(g.pairs.size()); ++k) {
    if (assembled_before.count(k)) continue;
    const PairSpec& pr = g.pairs[k];
    if (!poses[pr.part_a] || !poses[pr.part_b]) continue;
    if (is_assembled(relative_pose(*poses[pr.part_a], *poses[pr.part_b]), pr.gt_relative_pose, cfg)) {
      out.assembled_after.insert(k);
      ++out.reward;
    }
  }
  return out;
}

/// step_reward with a persistence requirement across frames.
class RewardTracker {
 public:
  RewardTracker() = default;
  RewardTracker(const AssemblyGraph& g, RewardConfig cfg) : cfg_(cfg), streak_(g.pairs.size(), 0) {}

  int update(const std::vector<std::optional<Pose>>& poses, const AssemblyGraph& g) {
    int reward = 0;
    for (int k = 0; k < static_cast<int>(g.pairs.size()); ++k) {
      if (rewarded_.count(k)) continue;
      const PairSpec& pr = g.pairs[k];
      if (!poses[pr.part_a] || !poses[pr.part_b]) continue;
      const bool ok = is_assembled(relative_pose(*poses[pr.part_a], *poses[pr.part_b]), pr.gt_relative_pose, cfg_);
      streak_[k] = ok ? streak_[k] + 1 : 0;
      if (streak_[k] >= cfg_.persistence) {
        rewarded_.insert(k);
        ++reward;
      }
    }
    total_ += reward;
    return reward;
  }

  const std::set<int>& rewarded() const { return rewarded_; }
  int total() const { return total_; }

 private:
  RewardConfig cfg_;
  std::vector<int> streak_;
  std::set<int> rewarded_;
  int total_ = 0;
};

struct PhaseState {
  int completed = 0;
  std::vector<char> satisfied;  // predicate values at the latest update

  bool operator==(const PhaseState&) const = default;
};

inline bool phase_predicate(const PhaseSpec& ph, const WorldState& w, const AssemblyGraph& g) {
  switch (ph.kind) {
    case PhaseKind::Grasped:
      return w.ee.held_part == ph.part;
    case PhaseKind::Placed: {
      if (w.ee.held_part == ph.part) return false;
      const Pose& p = w.parts[ph.part].pose;
      if (std::hypot(p.position.x() - ph.target_x, p.position.y() - ph.target_y) > ph.tolerance) return false;
      if (ph.target_yaw && std::abs(wrap_angle(yaw_of(p.orientation) - *ph.target_yaw)) > ph.yaw_tolerance) return false;
      return true;
    }
    case PhaseKind::Inserted: {
      const PartState& b = w.parts[g.pairs[ph.pair].part_b];
      return b.attached_to == g.pairs[ph.pair].part_a &&
             (b.status == PartStatus::Inserted || b.status == PartStatus::Assembled);
    }
    case PhaseKind::Assembled:
      return w.assembled_pairs.count(ph.pair) > 0;
  }
  return false;
}

/// Advance `completed` across consecutively satisfied phases; never regresses.
inline PhaseState update_phase(PhaseState s, const WorldState& w, const AssemblyGraph& g) {
  const int n = static_cast<int>(g.phases.size());
  s.satisfied.assign(n, 0);
  for (int i = 0; i < n; ++i) s.satisfied[i] = phase_predicate(g.phases[i], w, g);
  while (s.completed < n && s.satisfied[s.completed]) ++s.completed;
  return s;
}

}  // namespace fbench
