#pragma once
// Rigid-pose world: tabletop, corner obstacle, parts, and a task-space plant
// for the end-effector.
//
// The EE is a damped double integrator (semi-implicit Euler). Parts never
// move on their own: a held part follows the gripper rigidly, and parts
// mated to another part ride along with it. Mating (insert, screw, slide)
// is resolved kinematically once per low-level tick by resolve_mechanics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbench/catalog.hpp"
#include "fbench/geometry.hpp"
#include "fbench/rng.hpp"
#include "fbench/workspace.hpp"

namespace fbench {

enum class PartStatus { Free, Grasped, Inserted, Assembled };

inline std::string to_string(PartStatus s) {
  switch (s) {
    case PartStatus::Free: return "free";
    case PartStatus::Grasped: return "grasped";
    case PartStatus::Inserted: return "inserted";
    case PartStatus::Assembled: return "assembled";
  }
  return "?";
}

enum class GripperCommand { Open, Close, Hold };

inline std::string to_string(GripperCommand g) {
  switch (g) {
    case GripperCommand::Open: return "open";
    case GripperCommand::Close: return "close";
    case GripperCommand::Hold: return "hold";
  }
  return "?";
}

/// Full rotation a screw pair needs before it counts as assembled (540°).
inline constexpr double kScrewCompleteAngle = 3.0 * kPi;

struct WorldConfig {
  double mass = 1.0;       // kg, virtual
  double inertia = 0.01;   // kg m^2, isotropic
  double damping = 2.0;    // 1/s, velocity damping applied in the plant
  double force_bound = 1000.0;  // N, norm clamp on the commanded force
  double torque_bound = 10.0;   // N m, norm clamp on the commanded torque
  double max_gripper_width = 0.08;
  double gripper_speed = 0.2;  // m/s
  double grasp_radius = 0.02;
  double insert_position_tolerance = 0.010;  // per axis
  double insert_angle_tolerance = deg2rad(15.0);
  double grasp_yaw_budget = kPi / 2;
  Workspace workspace = default_workspace();
  Pose home = make_pose(Vec3(0.0, 0.0, 0.20), rot_x(kPi));

  bool operator==(const WorldConfig&) const = default;
};

struct PartState {
  Pose pose;
  PartStatus status = PartStatus::Free;
  double screw_angle = 0.0;     // rad accrued toward kScrewCompleteAngle
  double slide_remaining = 0.0; // m left to travel on a slide pair
  int attached_to = -1;         // partner part once inserted/assembled
  Pose attach_offset;           // pose in the partner's frame

  bool operator==(const PartState&) const = default;
};

struct EndEffectorState {
  Pose pose;
  Pose prev_pose;  // pose before the latest plant integration
  Vec3 linear_velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();
  double gripper_width = 0.08;
  int held_part = -1;
  Pose grasp_offset;  // held part in the EE frame
  double grasp_yaw_budget = 0.0;

  bool operator==(const EndEffectorState&) const = default;
};

struct WorldState {
  std::int64_t tick = 0;
  std::vector<PartState> parts;
  EndEffectorState ee;
  std::set<int> assembled_pairs;
  Rng rng;

  bool operator==(const WorldState&) const = default;
};

class InvalidConfiguration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Empty string when valid, otherwise a description naming offending parts.
inline std::string check_layout(const AssemblyGraph& graph, std::span<const Pose> poses, const Workspace& ws) {
  std::ostringstream err;
  if (static_cast<int>(poses.size()) != graph.n_parts()) {
    err << "expected " << graph.n_parts() << " part poses, got " << poses.size();
    return err.str();
  }
  for (int i = 0; i < graph.n_parts(); ++i) {
    const Vec3& p = poses[i].position;
    const double r = graph.parts[i].footprint_radius;
    if (!is_finite(poses[i])) err << graph.parts[i].id << " has a non-finite pose; ";
    else if (!ws.circle_in_table(p.x(), p.y(), r)) err << graph.parts[i].id << " is outside the table; ";
    else if (ws.circle_hits_wall(p.x(), p.y(), r)) err << graph.parts[i].id << " intersects the obstacle; ";
    for (int j = 0; j < i; ++j) {
      const Vec3& q = poses[j].position;
      if (std::hypot(p.x() - q.x(), p.y() - q.y()) < r + graph.parts[j].footprint_radius)
        err << graph.parts[j].id << " overlaps " << graph.parts[i].id << "; ";
    }
  }
  return err.str();
}

inline WorldState reset_world(const AssemblyGraph& graph, std::span<const Pose> part_poses, std::uint64_t seed,
                              const WorldConfig& cfg = {}) {
  const std::string problems = check_layout(graph, part_poses, cfg.workspace);
  if (!problems.empty()) throw InvalidConfiguration("invalid initial configuration: " + problems);
  WorldState s;
  s.rng = Rng::stream(seed, 1);
  for (const Pose& p : part_poses) {
    PartState ps;
    ps.pose = make_pose(p.position, p.orientation);
    s.parts.push_back(ps);
  }
  s.ee.pose = cfg.home;
  s.ee.prev_pose = cfg.home;
  s.ee.gripper_width = cfg.max_gripper_width;
  return s;
}

namespace detail {

inline bool attached(const PartState& p) { return p.attached_to >= 0; }

/// Recompute poses of parts riding on other parts, parents first.
inline void propagate_attachments(WorldState& s) {
  const int n = static_cast<int>(s.parts.size());
  std::vector<char> done(n, 0);
  auto resolve = [&](auto&& self, int i, int depth) -> void {
    if (done[i] || depth > n) return;
    PartState& p = s.parts[i];
    if (p.attached_to >= 0) {
      self(self, p.attached_to, depth + 1);
      p.pose = compose_poses(s.parts[p.attached_to].pose, p.attach_offset);
    }
    done[i] = 1;
  };
  for (int i = 0; i < n; ++i) resolve(resolve, i, 0);
}

inline Pose partner_frame(const WorldState& s, const PairSpec& pr) {
  return compose_poses(s.parts[pr.part_a].pose, pr.frame_a);
}

/// part_b in part_a's frame while threading, `angle` in [0, 3π].
inline Pose thread_pose(const PairSpec& pr, double angle) {
  const double lift = pr.screw_travel * (1.0 - angle / kScrewCompleteAngle);
  const Pose twist = make_pose(Vec3(0, 0, lift), rot_z(angle - kScrewCompleteAngle));
  return compose_poses(compose_poses(pr.frame_a, twist), inverse(pr.frame_b));
}

/// part_b in part_a's frame on a slide pair, `remaining` meters from the seat.
inline Pose slide_pose(const PairSpec& pr, double remaining) {
  return compose_poses(compose_poses(pr.frame_a, translation(0, 0, remaining)), inverse(pr.frame_b));
}

/// Where the moving part's mate frame has to be for the pair to engage.
inline Vec3 entry_point(const WorldState& s, const PairSpec& pr) {
  const Pose f = partner_frame(s, pr);
  const Vec3 n = f.orientation * Vec3::UnitZ();
  if (pr.mechanic == Mechanic::Screw) return f.position + pr.screw_travel * n;
  return f.position;
}

inline void settle_released(WorldState& s, const AssemblyGraph& g, int k, const WorldConfig& cfg) {
  PartState& p = s.parts[k];
  if (attached(p)) return;
  p.status = PartStatus::Free;
  p.pose.position.z() = cfg.workspace.table_height + g.parts[k].rest_height();
  p.pose.orientation = rot_z(yaw_of(p.pose.orientation));
}

inline int find_graspable(const WorldState& s, const AssemblyGraph& g, const WorldConfig& cfg) {
  int best = -1;
  double best_d = cfg.grasp_radius;
  for (int k = 0; k < g.n_parts(); ++k) {
    if (!(g.parts[k].graspable_width < s.ee.gripper_width)) continue;
    for (const Pose& f : g.parts[k].grasp_frames) {
      const double d = (compose_poses(s.parts[k].pose, f).position - s.ee.pose.position).norm();
      if (d <= best_d) {
        best_d = d;
        best = k;
      }
    }
  }
  return best;
}

}  // namespace detail

/// One low-level plant tick. `wrench` is (force, torque) in the world frame.
inline WorldState step_world(WorldState s, const AssemblyGraph& graph, const Vec6& wrench, GripperCommand gripper,
                             double dt, const WorldConfig& cfg = {}) {
  Vec3 f = wrench.head<3>();
  Vec3 tau = wrench.tail<3>();
  if (!f.allFinite() || !tau.allFinite()) {
    f.setZero();
    tau.setZero();
  }
  if (f.norm() > cfg.force_bound) f *= cfg.force_bound / f.norm();
  if (tau.norm() > cfg.torque_bound) tau *= cfg.torque_bound / tau.norm();

  EndEffectorState& ee = s.ee;
  ee.prev_pose = ee.pose;
  ee.linear_velocity += dt * (f / cfg.mass - cfg.damping * ee.linear_velocity);
  ee.pose.position += dt * ee.linear_velocity;
  ee.angular_velocity += dt * (tau / cfg.inertia - cfg.damping * ee.angular_velocity);
  ee.pose.orientation = normalized(from_rotation_vector(dt * ee.angular_velocity) * ee.pose.orientation);

  const double slew = cfg.gripper_speed * dt;
  switch (gripper) {
    case GripperCommand::Close: {
      if (ee.held_part < 0) {
        const int k = detail::find_graspable(s, graph, cfg);
        if (k >= 0) {
          ee.held_part = k;
          ee.grasp_offset = relative_pose(ee.prev_pose, s.parts[k].pose);
          ee.grasp_yaw_budget = cfg.grasp_yaw_budget;
          if (s.parts[k].status == PartStatus::Free) s.parts[k].status = PartStatus::Grasped;
        }
      }
      const double target = ee.held_part >= 0 ? graph.parts[ee.held_part].graspable_width : 0.0;
      ee.gripper_width = std::max(target, ee.gripper_width - slew);
      break;
    }
    case GripperCommand::Open:
      if (ee.held_part >= 0) {
        const int k = ee.held_part;
        ee.held_part = -1;
        ee.grasp_yaw_budget = 0.0;
        detail::settle_released(s, graph, k, cfg);
        detail::propagate_attachments(s);
      }
      ee.gripper_width = std::min(cfg.max_gripper_width, ee.gripper_width + slew);
      break;
    case GripperCommand::Hold:
      break;
  }

  if (ee.held_part >= 0 && !detail::attached(s.parts[ee.held_part])) {
    s.parts[ee.held_part].pose = compose_poses(ee.pose, ee.grasp_offset);
    detail::propagate_attachments(s);
  }
  ++s.tick;
  return s;
}

namespace detail {

inline void lock_ee_to_part(WorldState& s) {
  EndEffectorState& ee = s.ee;
  ee.pose = compose_poses(s.parts[ee.held_part].pose, inverse(ee.grasp_offset));
}

/// Held part is mated: only motion along the pair's free direction gets through.
inline void constrain_mated(WorldState& s, const AssemblyGraph& g) {
  EndEffectorState& ee = s.ee;
  const int h = ee.held_part;
  PartState& part = s.parts[h];
  const int k = g.pair_moving(h);
  if (k < 0 || part.status == PartStatus::Assembled) {
    lock_ee_to_part(s);
    ee.linear_velocity.setZero();
    ee.angular_velocity.setZero();
    return;
  }
  const PairSpec& pr = g.pairs[k];
  const Pose f = partner_frame(s, pr);
  const Vec3 n = f.orientation * Vec3::UnitZ();
  if (pr.mechanic == Mechanic::Screw) {
    const double delta = twist_angle(normalized(ee.pose.orientation * ee.prev_pose.orientation.conjugate()), n);
    const double accrue = std::clamp(delta, 0.0, ee.grasp_yaw_budget);
    part.screw_angle += accrue;
    ee.grasp_yaw_budget -= accrue;
    const double spin = ee.angular_velocity.dot(n);
    ee.angular_velocity = (accrue > 0.0 && ee.grasp_yaw_budget > 0.0 && spin > 0.0) ? Vec3(spin * n) : Vec3::Zero();
    if (part.screw_angle >= kScrewCompleteAngle - 1e-9) {
      part.screw_angle = std::max(part.screw_angle, kScrewCompleteAngle);
      part.status = PartStatus::Assembled;
      s.assembled_pairs.insert(k);
      part.attach_offset = pr.gt_relative_pose;
      ee.angular_velocity.setZero();
    } else {
      part.attach_offset = thread_pose(pr, part.screw_angle);
    }
    ee.linear_velocity.setZero();
  } else if (pr.mechanic == Mechanic::Slide) {
    const double delta = (ee.pose.position - ee.prev_pose.position).dot(-n);
    const double advance = std::clamp(delta, 0.0, part.slide_remaining);
    part.slide_remaining -= advance;
    const double inward = ee.linear_velocity.dot(-n);
    ee.linear_velocity = (advance > 0.0 && inward > 0.0) ? Vec3(-inward * n) : Vec3::Zero();
    ee.angular_velocity.setZero();
    if (part.slide_remaining <= 1e-9) {
      part.slide_remaining = 0.0;
      part.status = PartStatus::Assembled;
      s.assembled_pairs.insert(k);
      part.attach_offset = pr.gt_relative_pose;
      ee.linear_velocity.setZero();
    } else {
      part.attach_offset = slide_pose(pr, part.slide_remaining);
    }
  } else {
    ee.linear_velocity.setZero();
    ee.angular_velocity.setZero();
  }
  propagate_attachments(s);
  lock_ee_to_part(s);
}

/// Keep the held part's footprint out of the obstacle walls.
inline void clamp_to_walls(WorldState& s, const AssemblyGraph& g, const WorldConfig& cfg) {
  EndEffectorState& ee = s.ee;
  PartState& part = s.parts[ee.held_part];
  const double r = g.parts[ee.held_part].footprint_radius;
  Vec3 c = part.pose.position;
  Vec3 shift = Vec3::Zero();
  for (const Rect& w : cfg.workspace.walls) {
    const double qx = std::clamp(c.x(), w.xmin, w.xmax);
    const double qy = std::clamp(c.y(), w.ymin, w.ymax);
    const double dx = c.x() - qx, dy = c.y() - qy;
    const double d = std::hypot(dx, dy);
    if (d >= r) continue;
    Vec3 normal;
    double push;
    if (d > 1e-12) {
      normal = Vec3(dx / d, dy / d, 0);
      push = r - d;
    } else {
      // Center inside the wall: leave through the nearest face.
      const double faces[4] = {c.x() - w.xmin, w.xmax - c.x(), c.y() - w.ymin, w.ymax - c.y()};
      const int m = static_cast<int>(std::min_element(faces, faces + 4) - faces);
      const Vec3 normals[4] = {-Vec3::UnitX(), Vec3::UnitX(), -Vec3::UnitY(), Vec3::UnitY()};
      normal = normals[m];
      push = faces[m] + r;
    }
    c += push * normal;
    shift += push * normal;
    const double into = ee.linear_velocity.dot(normal);
    if (into < 0.0) ee.linear_velocity -= into * normal;
  }
  if (shift.isZero(0.0)) return;
  part.pose.position = c;
  ee.pose.position += shift;
  propagate_attachments(s);
}

/// Engage the held part with its partner when aligned and moving in.
inline void try_engage(WorldState& s, const AssemblyGraph& g, const WorldConfig& cfg) {
  EndEffectorState& ee = s.ee;
  const int h = ee.held_part;
  const int k = g.pair_moving(h);
  if (k < 0) return;
  const PairSpec& pr = g.pairs[k];
  if (s.parts[pr.part_a].attached_to == h || pr.part_a == h) return;
  const Pose f = partner_frame(s, pr);
  const Vec3 n = f.orientation * Vec3::UnitZ();
  const Pose mate = compose_poses(s.parts[h].pose, pr.frame_b);
  const Vec3 mate_z = mate.orientation * Vec3::UnitZ();
  const double tilt = std::acos(std::clamp(mate_z.dot(n), -1.0, 1.0));
  if (!(tilt < cfg.insert_angle_tolerance)) return;

  const Vec3 target = entry_point(s, pr);
  const Vec3 d = mate.position - target;
  const double tol = cfg.insert_position_tolerance;
  double axial = 0.0;
  if (pr.mechanic == Mechanic::Slide) {
    axial = d.dot(n);
    const Vec3 lateral = d - axial * n;
    if ((lateral.array().abs() >= tol).any()) return;
    if (axial <= -tol || axial > pr.approach_corridor) return;
  } else if ((d.array().abs() >= tol).any()) {
    return;
  }
  // Engage only while pushing into the partner along the pair axis.
  const Vec3 moved = ee.pose.position - ee.prev_pose.position;
  if (!(moved.dot(n) < 0.0)) return;

  PartState& part = s.parts[h];
  part.attached_to = pr.part_a;
  switch (pr.mechanic) {
    case Mechanic::Insert:
      part.status = PartStatus::Assembled;
      part.attach_offset = pr.gt_relative_pose;
      s.assembled_pairs.insert(k);
      break;
    case Mechanic::Screw:
      part.status = PartStatus::Inserted;
      part.screw_angle = 0.0;
      part.attach_offset = thread_pose(pr, 0.0);
      break;
    case Mechanic::Slide:
      part.slide_remaining = std::max(0.0, axial);
      if (part.slide_remaining <= 1e-9) {
        part.status = PartStatus::Assembled;
        part.attach_offset = pr.gt_relative_pose;
        s.assembled_pairs.insert(k);
      } else {
        part.status = PartStatus::Inserted;
        part.attach_offset = slide_pose(pr, part.slide_remaining);
      }
      break;
  }
  propagate_attachments(s);
  lock_ee_to_part(s);
  ee.linear_velocity.setZero();
  ee.angular_velocity.setZero();
}

}  // namespace detail

/// Apply mating, screwing, sliding and wall constraints after a plant tick.
inline WorldState resolve_mechanics(WorldState s, const AssemblyGraph& graph, const WorldConfig& cfg = {}) {
  const int h = s.ee.held_part;
  if (h < 0) return s;
  if (detail::attached(s.parts[h])) {
    detail::constrain_mated(s, graph);
    return s;
  }
  detail::clamp_to_walls(s, graph, cfg);
  detail::try_engage(s, graph, cfg);
  return s;
}

/// step_world followed by resolve_mechanics.
inline WorldState advance_world(const WorldState& s, const AssemblyGraph& graph, const Vec6& wrench,
                                GripperCommand gripper, double dt, const WorldConfig& cfg = {}) {
  return resolve_mechanics(step_world(s, graph, wrench, gripper, dt, cfg), graph, cfg);
}

}  // namespace fbench
