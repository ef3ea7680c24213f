#pragma once
// Scripted expert. Reads the true world state (not the fused estimates) and
// works through the furniture's phase list with waypoint primitives:
// approach, grasp, lift, transport, align, insert push, screw quarter turns
// with regrasps, release.

#include <cmath>
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fbench/controller.hpp"
#include "fbench/env.hpp"

namespace fbench {

struct ExpertConfig {
  double travel_height = 0.18;      // EE z while carrying across the table
  double approach_clearance = 0.04; // mate stand-off before the insert push
  double fast_step = 0.08;          // m per action
  double slow_step = 0.01;          // m per action near contact
  double rot_step = deg2rad(15.0);  // rad per action
  double position_tolerance = 0.002;
  double rotation_tolerance = deg2rad(1.0);
  double regrasp_lift = 0.015;
  int primitive_timeout = 80;
};

struct ScrewSegment {
  int pair = -1;
  double accrued = 0.0;  // rad of screw progress in this grasp
};

struct ExpertTranscript {
  std::vector<std::string> primitives;
  std::vector<ScrewSegment> screw_segments;
  int regrasps = 0;
  int replans = 0;
};

class ScriptedExpert {
 public:
  explicit ScriptedExpert(ExpertConfig cfg = {}) : cfg_(cfg) {}

  Action act(const Env& env) {
    const WorldState& w = env.world();
    const AssemblyGraph& g = env.graph();
    const int phase = env.phase().completed;
    if (phase != planned_phase_) {
      // The step that advanced the phase may also have finished the front primitive.
      flush(w);
      queue_.clear();
      planned_phase_ = phase;
      plan(w, g, phase);
    }
    for (int guard = 0; guard < 8; ++guard) {
      if (queue_.empty()) {
        if (phase >= static_cast<int>(g.phases.size())) return Action::zero();
        ++transcript_.replans;
        plan(w, g, phase);
        if (queue_.empty()) return Action::zero();
      }
      Primitive& p = queue_.front();
      if (!p.started) {
        p.started = true;
        if (p.on_start) p.on_start(w);
        transcript_.primitives.push_back(p.name);
      }
      if ((p.done && p.done(w)) || (!p.done && p.target && reached(w.ee.pose, p.target(w)))) {
        if (p.on_finish) p.on_finish(w);
        queue_.pop_front();
        continue;
      }
      if (++p.steps > p.max_steps) {
        queue_.clear();
        continue;
      }
      return step_toward(w, p);
    }
    return Action::zero();
  }

  /// Close out the primitive the last step finished. Call once the episode
  /// ends, since act() is not consulted again after the final step.
  void finish(const Env& env) {
    flush(env.world());
    queue_.clear();
  }

  const ExpertTranscript& transcript() const { return transcript_; }

 private:
  struct Primitive {
    std::string name;
    std::function<Pose(const WorldState&)> target;
    std::function<double(const WorldState&)> gripper;  // defaults to "keep holding"
    std::function<bool(const WorldState&)> done;       // defaults to "target reached"
    std::function<void(const WorldState&)> on_start;
    std::function<void(const WorldState&)> on_finish;
    double step = 0.08;
    double rot_step = deg2rad(15.0);
    int max_steps = 80;
    int steps = 0;
    bool started = false;
  };

  void flush(const WorldState& w) {
    if (queue_.empty()) return;
    Primitive& p = queue_.front();
    if (p.started && p.done && p.done(w) && p.on_finish) {
      auto hook = std::move(p.on_finish);
      p.on_finish = nullptr;
      hook(w);
    }
  }

  bool reached(const Pose& ee, const Pose& t) const {
    return (ee.position - t.position).norm() < cfg_.position_tolerance &&
           geodesic_angle(ee.orientation, t.orientation) < cfg_.rotation_tolerance;
  }

  static double hold_value(const WorldState& w) { return w.ee.held_part >= 0 ? 1.0 : -1.0; }

  Action step_toward(const WorldState& w, const Primitive& p) const {
    Action a;
    a.gripper = p.gripper ? p.gripper(w) : hold_value(w);
    if (!p.target) return a;
    const Pose t = p.target(w);
    Vec3 dp = t.position - w.ee.pose.position;
    if (dp.norm() > p.step) dp *= p.step / dp.norm();
    a.delta_position = dp;
    Quat dq = normalized(w.ee.pose.orientation.conjugate() * t.orientation);
    if (dq.w() < 0) dq.coeffs() = -dq.coeffs();
    const double ang = geodesic_angle(Quat::Identity(), dq);
    if (ang > p.rot_step) dq = slerp(Quat::Identity(), dq, p.rot_step / ang);
    a.delta_orientation = dq;
    return a;
  }

  Primitive make(std::string name, std::function<Pose(const WorldState&)> target, double step) const {
    Primitive p;
    p.name = std::move(name);
    p.target = std::move(target);
    p.step = step;
    p.rot_step = cfg_.rot_step;
    p.max_steps = cfg_.primitive_timeout;
    return p;
  }

  // EE pose that puts `part` at `part_pose` given the current grasp.
  static Pose ee_for_part(const WorldState& w, const Pose& part_pose) {
    return compose_poses(part_pose, inverse(w.ee.grasp_offset));
  }

  static Pose grasp_pose(const WorldState& w, const AssemblyGraph& g, int part) {
    const Pose f = compose_poses(w.parts[part].pose, g.parts[part].grasp_frames.front());
    // Gripper down, jaw yaw following the part.
    return make_pose(f.position, rot_z(yaw_of(w.parts[part].pose.orientation)) * rot_x(kPi));
  }

  /// Rise to travel height, cross over, then come down to `goal` (all EE poses).
  void travel(std::function<Pose(const WorldState&)> goal, double above, const std::string& tag) {
    const double h = cfg_.travel_height;
    queue_.push_back(make(
        "rise:" + tag,
        [h](const WorldState& w) {
          return Pose{Vec3(w.ee.pose.position.x(), w.ee.pose.position.y(), std::max(h, w.ee.pose.position.z())),
                      w.ee.pose.orientation};
        },
        cfg_.fast_step));
    queue_.back().done = [h, this](const WorldState& w) {
      return w.ee.pose.position.z() > std::min(h, w.ee.pose.position.z() + 1.0) - cfg_.position_tolerance;
    };
    queue_.push_back(make(
        "cross:" + tag,
        [goal, h](const WorldState& w) {
          const Pose t = goal(w);
          return Pose{Vec3(t.position.x(), t.position.y(), std::max(h, t.position.z())), t.orientation};
        },
        cfg_.fast_step));
    queue_.push_back(make(
        "descend:" + tag,
        [goal, above](const WorldState& w) {
          Pose t = goal(w);
          t.position.z() += above;
          return t;
        },
        cfg_.fast_step));
  }

  void open_gripper(const std::string& tag) {
    Primitive p = make("open:" + tag, nullptr, 0);
    p.gripper = [](const WorldState&) { return -1.0; };
    p.done = [](const WorldState& w) { return w.ee.held_part < 0 && w.ee.gripper_width > 0.05; };
    p.max_steps = 10;
    queue_.push_back(p);
  }

  void grasp_sequence(const AssemblyGraph& g, int part) {
    const std::string tag = g.parts[part].id;
    travel([&g, part](const WorldState& w) { return grasp_pose(w, g, part); }, 0.05, tag);
    Primitive down = make(
        "approach:" + tag, [&g, part](const WorldState& w) { return grasp_pose(w, g, part); }, cfg_.slow_step * 3);
    queue_.push_back(down);
    Primitive close = make("grasp:" + tag, nullptr, 0);
    close.gripper = [](const WorldState&) { return 1.0; };
    close.done = [part](const WorldState& w) { return w.ee.held_part == part; };
    close.max_steps = 4;
    queue_.push_back(close);
  }

  void release_and_rise(const std::string& tag) {
    open_gripper(tag);
    auto anchor = std::make_shared<Vec3>();
    Primitive up = make(
        "retreat:" + tag,
        [anchor](const WorldState& w) { return Pose{*anchor, w.ee.pose.orientation}; }, cfg_.fast_step);
    up.on_start = [anchor](const WorldState& w) { *anchor = w.ee.pose.position + Vec3(0, 0, 0.06); };
    up.gripper = [](const WorldState&) { return -1.0; };
    queue_.push_back(up);
  }

  /// Pose of part_b where the pair engages (thread start, seat or corridor mouth).
  static Pose engage_pose(const WorldState& w, const PairSpec& pr, double slide_out) {
    const Pose& a = w.parts[pr.part_a].pose;
    switch (pr.mechanic) {
      case Mechanic::Screw: return compose_poses(a, detail::thread_pose(pr, 0.0));
      case Mechanic::Insert: return compose_poses(a, pr.gt_relative_pose);
      case Mechanic::Slide: return compose_poses(a, detail::slide_pose(pr, slide_out));
    }
    return a;
  }

  static Vec3 pair_axis(const WorldState& w, const PairSpec& pr) {
    return detail::partner_frame(w, pr).orientation * Vec3::UnitZ();
  }

  void insert_sequence(const AssemblyGraph& g, int pair) {
    const PairSpec& pr = g.pairs[pair];
    const std::string tag = g.parts[pr.part_b].id;
    const double clear = cfg_.approach_clearance;
    const double slide_out = pr.approach_corridor + clear;
    auto stand_off = [&pr, clear, slide_out](const WorldState& w) {
      Pose p = engage_pose(w, pr, slide_out);
      if (pr.mechanic != Mechanic::Slide) p.position += clear * pair_axis(w, pr);
      return ee_for_part(w, p);
    };
    travel(stand_off, 0.0, tag);
    Primitive push = make(
        "insert:" + tag,
        [&pr](const WorldState& w) {
          Pose p = engage_pose(w, pr, 0.0);
          p.position -= 0.01 * pair_axis(w, pr);
          return ee_for_part(w, p);
        },
        cfg_.slow_step);
    const int b = pr.part_b;
    push.done = [b](const WorldState& w) { return w.parts[b].attached_to >= 0; };
    queue_.push_back(push);
  }

  void screw_loop(const AssemblyGraph& g, int pair) {
    const PairSpec& pr = g.pairs[pair];
    const int b = pr.part_b;
    const std::string tag = g.parts[b].id;
    auto start_angle = std::make_shared<double>(0.0);
    Primitive twist = make(
        "screw:" + tag,
        [this, &pr](const WorldState& w) {
          const double turn = std::min(cfg_.rot_step, w.ee.grasp_yaw_budget + deg2rad(2.0));
          return Pose{w.ee.pose.position, normalized(axis_angle(pair_axis(w, pr), turn) * w.ee.pose.orientation)};
        },
        0.0);
    twist.rot_step = cfg_.rot_step + deg2rad(2.0);
    twist.on_start = [start_angle, b](const WorldState& w) { *start_angle = w.parts[b].screw_angle; };
    twist.done = [b](const WorldState& w) {
      return w.parts[b].status == PartStatus::Assembled || w.ee.held_part != b || w.ee.grasp_yaw_budget <= 0.0;
    };
    twist.on_finish = [this, start_angle, b, pair, &g](const WorldState& w) {
      transcript_.screw_segments.push_back({pair, w.parts[b].screw_angle - *start_angle});
      if (w.parts[b].status != PartStatus::Assembled) regrasp(g, pair);
    };
    queue_.push_back(twist);
  }

  // Open, lift a little, turn the wrist back a quarter, come down, close, screw again.
  void regrasp(const AssemblyGraph& g, int pair) {
    const PairSpec& pr = g.pairs[pair];
    const int b = pr.part_b;
    const std::string tag = g.parts[b].id;
    std::deque<Primitive> seq;
    Primitive open = make("open:" + tag, nullptr, 0);
    open.gripper = [](const WorldState&) { return -1.0; };
    open.done = [b, &g](const WorldState& w) {
      return w.ee.held_part < 0 && w.ee.gripper_width > g.parts[b].graspable_width + 0.005;
    };
    open.max_steps = 10;
    seq.push_back(open);
    auto lifted = std::make_shared<Pose>();
    Primitive lift = make(
        "lift:" + tag, [lifted](const WorldState&) { return *lifted; }, cfg_.slow_step * 2);
    lift.on_start = [lifted, this](const WorldState& w) {
      *lifted = {w.ee.pose.position + Vec3(0, 0, cfg_.regrasp_lift), w.ee.pose.orientation};
    };
    lift.gripper = [](const WorldState&) { return -1.0; };
    seq.push_back(lift);
    auto back = std::make_shared<Pose>();
    Primitive unturn = make(
        "unturn:" + tag, [back](const WorldState&) { return *back; }, cfg_.slow_step);
    unturn.on_start = [back, &pr](const WorldState& w) {
      *back = {w.ee.pose.position, normalized(axis_angle(pair_axis(w, pr), -kPi / 2) * w.ee.pose.orientation)};
    };
    unturn.gripper = [](const WorldState&) { return -1.0; };
    seq.push_back(unturn);
    Primitive down = make(
        "regrasp:" + tag,
        [&g, b](const WorldState& w) {
          const Vec3 p = compose_poses(w.parts[b].pose, g.parts[b].grasp_frames.front()).position;
          return Pose{p, w.ee.pose.orientation};
        },
        cfg_.slow_step * 2);
    down.gripper = [](const WorldState&) { return -1.0; };
    seq.push_back(down);
    Primitive close = make("grasp:" + tag, nullptr, 0);
    close.gripper = [](const WorldState&) { return 1.0; };
    close.done = [b](const WorldState& w) { return w.ee.held_part == b; };
    close.on_finish = [this](const WorldState&) { ++transcript_.regrasps; };
    close.max_steps = 4;
    seq.push_back(close);
    // The twist that just finished is still at the queue front; it is popped
    // after this hook returns, so insert behind it.
    auto it = queue_.empty() ? queue_.end() : std::next(queue_.begin());
    queue_.insert(it, seq.begin(), seq.end());
    auto pos = queue_.empty() ? queue_.end() : std::next(queue_.begin(), 1 + static_cast<long>(seq.size()));
    const std::size_t before = queue_.size();
    screw_loop(g, pair);  // appends a new twist at the back
    if (queue_.size() > before) {
      Primitive again = queue_.back();
      queue_.pop_back();
      queue_.insert(pos, again);
    }
  }

  void plan(const WorldState& w, const AssemblyGraph& g, int phase) {
    if (phase >= static_cast<int>(g.phases.size())) {
      if (w.ee.held_part >= 0) release_and_rise("done");
      return;
    }
    const PhaseSpec& ph = g.phases[phase];
    const int needed = (ph.kind == PhaseKind::Grasped || ph.kind == PhaseKind::Placed) ? ph.part
                                                                                      : g.pairs[ph.pair].part_b;
    if (w.ee.held_part >= 0 && w.ee.held_part != needed) release_and_rise("switch");
    const bool holding = w.ee.held_part == needed;
    switch (ph.kind) {
      case PhaseKind::Grasped:
        grasp_sequence(g, ph.part);
        break;
      case PhaseKind::Placed: {
        if (!holding) grasp_sequence(g, ph.part);
        const int part = ph.part;
        const PhaseSpec spec = ph;
        const double rest = g.parts[part].rest_height();
        auto goal = [part, spec, rest](const WorldState& w) {
          const double yaw = spec.target_yaw ? *spec.target_yaw : yaw_of(w.parts[part].pose.orientation);
          const Pose p = make_pose(Vec3(spec.target_x, spec.target_y, rest + 0.002), rot_z(yaw));
          return ee_for_part(w, p);
        };
        travel(goal, 0.0, g.parts[part].id);
        release_and_rise(g.parts[part].id);
        break;
      }
      case PhaseKind::Inserted:
        if (!holding) grasp_sequence(g, needed);
        insert_sequence(g, ph.pair);
        break;
      case PhaseKind::Assembled: {
        const PairSpec& pr = g.pairs[ph.pair];
        const PartState& b = w.parts[pr.part_b];
        if (b.attached_to < 0) {
          if (!holding) grasp_sequence(g, needed);
          insert_sequence(g, ph.pair);
        } else if (!holding) {
          grasp_sequence(g, needed);
        }
        if (pr.mechanic == Mechanic::Screw) {
          screw_loop(g, ph.pair);
        } else if (pr.mechanic == Mechanic::Slide) {
          const int pb = pr.part_b;
          Primitive push = make(
              "slide:" + g.parts[pb].id,
              [&pr](const WorldState& w) {
                Pose p = compose_poses(w.parts[pr.part_a].pose, pr.gt_relative_pose);
                p.position -= 0.01 * pair_axis(w, pr);
                return ee_for_part(w, p);
              },
              cfg_.slow_step);
          push.done = [pb](const WorldState& w) { return w.parts[pb].status == PartStatus::Assembled; };
          queue_.push_back(push);
        }
        break;
      }
    }
  }

  ExpertConfig cfg_;
  std::deque<Primitive> queue_;
  int planned_phase_ = -1;
  ExpertTranscript transcript_;
};

}  // namespace fbench
