// Acceptance run: one PASS/FAIL line per headline criterion. Exit 0 iff all pass.

#include <boost/math/distributions/chi_squared.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "fbench/dataset.hpp"
#include "fbench/evaluate.hpp"
#include "fbench/expert.hpp"
#include "fbench/image.hpp"
#include "fbench/init_sampler.hpp"
#include "fbench/perception.hpp"
#include "fbench/reward.hpp"

using namespace fbench;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream why;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      why << "[" << what << "] ";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunConfig config_for(const std::string& furniture, Level level = Level::Low) {
  RunConfig c;
  c.furniture = furniture;
  c.level = level;
  return c;
}

Action move(double dx, double dy, double dz) {
  Action a;
  a.delta_position = Vec3(dx, dy, dz);
  return a;
}

// --- 1 ---------------------------------------------------------------------------

// Column-wise cosine and per-axis distance, computed from raw quaternion components.
bool oracle_assembled(const Pose& rel, const Pose& gt) {
  auto cols = [](const Quat& q0) {
    const double n = std::sqrt(q0.w() * q0.w() + q0.x() * q0.x() + q0.y() * q0.y() + q0.z() * q0.z());
    const double w = q0.w() / n, x = q0.x() / n, y = q0.y() / n, z = q0.z() / n;
    return std::array<std::array<double, 3>, 3>{{{1 - 2 * (y * y + z * z), 2 * (x * y + w * z), 2 * (x * z - w * y)},
                                                 {2 * (x * y - w * z), 1 - 2 * (x * x + z * z), 2 * (y * z + w * x)},
                                                 {2 * (x * z + w * y), 2 * (y * z - w * x), 1 - 2 * (x * x + y * y)}}};
  };
  const auto a = cols(rel.orientation), b = cols(gt.orientation);
  for (int c = 0; c < 3; ++c)
    if (!(a[c][0] * b[c][0] + a[c][1] * b[c][1] + a[c][2] * b[c][2] > 0.96)) return false;
  const Vec3 d = rel.position - gt.position;
  return std::fabs(d.x()) < 0.007 && std::fabs(d.y()) < 0.007 && std::fabs(d.z()) < 0.007;
}

void reward_oracle(Verdict& v) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(7);
  int mismatches = 0;
  const AssemblyGraph g = load_furniture("square_table");
  for (int i = 0; i < 100000; ++i) {
    const Pose& gt = g.pairs[i % g.pairs.size()].gt_relative_pose;
    const Vec3 dp(rng.uniform(-0.01, 0.01), rng.uniform(-0.01, 0.01), rng.uniform(-0.01, 0.01));
    const Pose rel{gt.position + dp, normalized(axis_angle(rng.unit_vector(), rng.uniform(0.0, deg2rad(30.0))) * gt.orientation)};
    mismatches += is_assembled(rel, gt) != oracle_assembled(rel, gt);
  }
  const double secs = seconds_since(t0);
  v.require(mismatches == 0, std::to_string(mismatches) + " mismatches");
  const Pose id = Pose::identity();
  v.require(is_assembled({Vec3::Zero(), rot_z(deg2rad(15.0))}, id), "15 deg assembled");
  v.require(!is_assembled({Vec3::Zero(), rot_z(deg2rad(20.0))}, id), "20 deg not assembled");
  v.require(is_assembled({Vec3(0.006, 0.006, 0.006), Quat::Identity()}, id), "(6,6,6) mm assembled");
  v.require(!is_assembled({Vec3(0.008, 0, 0), Quat::Identity()}, id), "(8,0,0) mm not assembled");
  v.require(secs < 10.0, "runtime");
  v.why << "1e5 poses, " << mismatches << " mismatches, " << secs << " s";
}

// --- 2 ---------------------------------------------------------------------------

void once_per_pair(Verdict& v) {
  const AssemblyGraph g = load_furniture("one_leg");
  const int top = g.pairs[0].part_a, leg = g.pairs[0].part_b;
  std::vector<std::optional<Pose>> poses(g.n_parts(), Pose::identity());
  poses[top] = make_pose(Vec3(0.1, 0.05, 0.02), rot_z(0.3));
  auto set_leg = [&](bool together) {
    poses[leg] = together ? compose_poses(*poses[top], g.pairs[0].gt_relative_pose)
                          : make_pose(Vec3(-0.2, 0.1, 0.0), Quat::Identity());
  };
  RewardTracker t(g, {});
  set_leg(true);
  const int r1 = t.update(poses, g);
  set_leg(false);
  const int r2 = t.update(poses, g);
  set_leg(true);
  const int r3 = t.update(poses, g);
  v.require(r1 == 1 && r2 == 0 && r3 == 0, "1/0/0 sequence");

  int worst_excess = 0, episodes = 0;
  for (const std::string& id : builtin_furniture_ids()) {
    RunConfig cfg = config_for(id);
    cfg.termination.max_steps_total = 60;
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = 0; s < 100; ++s) seeds.push_back(s);
    const EvalMetrics m = evaluate_policy(cfg, random_policy_factory(), seeds);
    const int n = load_furniture(id).n_parts();
    for (const EpisodeResult& e : m.episodes) worst_excess = std::max(worst_excess, e.reward - (n - 1));
    episodes += static_cast<int>(m.episodes.size());
  }
  v.require(worst_excess <= 0, "episode total above N-1");
  v.why << "rewards " << r1 << "/" << r2 << "/" << r3 << ", " << episodes << " random episodes within N-1";
}

// --- 3 ---------------------------------------------------------------------------

void expert_totals(Verdict& v) {
  const auto t0 = std::chrono::steady_clock::now();
  struct Want {
    std::string id;
    int reward, phases;
  };
  for (const Want& want : {Want{"one_leg", 1, 5}, Want{"lamp", 2, 7}}) {
    int ok = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      const EpisodeResult r = run_episode(config_for(want.id), load_furniture(want.id), s, scripted_policy_factory(),
                                          Operator::Scripted, nullptr);
      ok += r.reward == want.reward && r.phases == want.phases && r.success;
    }
    v.require(ok == 20, want.id);
    v.why << want.id << " " << ok << "/20, ";
  }
  const double secs = seconds_since(t0);
  v.require(secs < 120.0, "runtime");
  v.why << secs << " s";
}

// --- 4 ---------------------------------------------------------------------------

void controller_constants(Verdict& v) {
  const ControllerConfig cfg;
  v.require(cfg.subgoal_count() == 33, "33 subgoals");
  v.require(cfg.ticks_per_action() == 99, "99 ticks");
  v.require(cfg.delta_position_clip == 0.10, "0.10 clip");
  const Pose cur = make_pose(Vec3(0, 0, 0.2), rot_x(kPi));
  auto grip = [&](double g) {
    Action a;
    a.gripper = g;
    return process_action(cur, a, cfg).gripper;
  };
  v.require(grip(0.019) == GripperCommand::Hold && grip(-0.019) == GripperCommand::Hold, "dead zone at 0.019");
  v.require(grip(0.0191) == GripperCommand::Close && grip(-0.0191) == GripperCommand::Open, "beyond dead zone");
  const ProcessedAction big = process_action(cur, move(0.6, 0.8, 0), cfg);
  v.require(std::abs((big.goal.position - cur.position).norm() - 0.10) < 1e-12, "clip by norm");
  v.require(static_cast<int>(big.subgoals.size()) == 33, "subgoal list");

  const AssemblyGraph g = load_furniture("one_leg");
  WorldState s = reset_world(g, g.base_poses, 0);
  const Pose goal = make_pose(s.ee.pose.position + Vec3(0.05, 0, 0), s.ee.pose.orientation);
  const WorldConfig plant = plant_config(cfg);
  int settled_at = -1;
  for (int tick = 0; tick < 300; tick += cfg.torque_repeat) {
    const Vec6 w = control_substep(goal, s.ee, cfg);
    for (int r = 0; r < cfg.torque_repeat; ++r) s = advance_world(s, g, w, GripperCommand::Hold, cfg.plant_dt(), plant);
    const bool inside = (s.ee.pose.position - goal.position).norm() < 1e-3;
    if (inside && settled_at < 0) settled_at = tick + cfg.torque_repeat;
    if (!inside) settled_at = -1;
  }
  v.require(settled_at >= 0 && settled_at <= 100, "settle within 100 ticks");
  v.why << "33 subgoals, 99 ticks, clip 0.10, dead zone 0.019, 5 cm settles in " << settled_at << " ticks";
}

// --- 5 ---------------------------------------------------------------------------

WorldState kinematic_move(WorldState s, const AssemblyGraph& g, const Pose& to) {
  s.ee.prev_pose = s.ee.pose;
  s.ee.pose = to;
  if (s.ee.held_part >= 0 && s.parts[s.ee.held_part].attached_to < 0) {
    s.parts[s.ee.held_part].pose = compose_poses(to, s.ee.grasp_offset);
    detail::propagate_attachments(s);
  }
  return resolve_mechanics(s, g);
}

WorldState gripper_ticks(WorldState s, const AssemblyGraph& g, GripperCommand c, int n) {
  for (int i = 0; i < n; ++i) s = advance_world(s, g, Vec6::Zero(), c, 1e-3);
  return s;
}

void screw(Verdict& v) {
  // An operator that tries to turn the full 540 deg in every grasp.
  const AssemblyGraph g = load_furniture("one_leg");
  const int leg = g.part_index("leg");
  const PairSpec& pr = g.pairs[0];
  WorldState s = reset_world(g, g.base_poses, 1);
  s.ee.pose = make_pose(compose_poses(s.parts[leg].pose, g.parts[leg].grasp_frames.front()).position, rot_x(kPi));
  s.ee.prev_pose = s.ee.pose;
  s = gripper_ticks(s, g, GripperCommand::Close, 1);
  const Vec3 shift = detail::entry_point(s, pr) + Vec3(0, 0, 0.005) - compose_poses(s.parts[leg].pose, pr.frame_b).position;
  s = kinematic_move(s, g, make_pose(s.ee.pose.position + shift, s.ee.pose.orientation));
  s = kinematic_move(s, g, make_pose(s.ee.pose.position - Vec3(0, 0, 0.006), s.ee.pose.orientation));
  v.require(s.parts[leg].status == PartStatus::Inserted, "leg inserted");
  int grasps = 1;
  bool monotone = true;
  double last = s.parts[leg].screw_angle;
  while (s.parts[leg].status != PartStatus::Assembled && grasps <= 20) {
    for (int i = 0; i < 54; ++i) {  // 540 deg in 10 deg twists
      s = kinematic_move(s, g, make_pose(s.ee.pose.position, rot_z(deg2rad(10)) * s.ee.pose.orientation));
      monotone &= s.parts[leg].screw_angle >= last;
      last = s.parts[leg].screw_angle;
    }
    if (s.parts[leg].status == PartStatus::Assembled) break;
    s = gripper_ticks(s, g, GripperCommand::Open, 60);
    s = kinematic_move(s, g, make_pose(s.ee.pose.position, rot_z(-kPi / 2) * s.ee.pose.orientation));
    s = gripper_ticks(s, g, GripperCommand::Close, 1);
    ++grasps;
  }
  v.require(grasps >= 6, "540 deg needs at least 6 grasps");
  v.require(monotone, "screw_angle monotone");

  // Expert transcript.
  Env env(config_for("one_leg"));
  env.reset(0);
  ScriptedExpert expert;
  double prev = 0.0;
  while (!env.done()) {
    env.step(expert.act(env));
    monotone &= env.world().parts[leg].screw_angle >= prev;
    prev = env.world().parts[leg].screw_angle;
  }
  expert.finish(env);
  const auto& segs = expert.transcript().screw_segments;
  bool quarters = segs.size() == 6;
  for (const ScrewSegment& seg : segs) quarters &= std::abs(seg.accrued - kPi / 2) < 1e-6;
  v.require(quarters, "expert 6 x 90 deg segments");
  v.require(monotone, "expert screw_angle monotone");
  v.why << "greedy operator needed " << grasps << " grasps; expert logged " << segs.size() << " segments of 90 deg";
}

// --- 6 ---------------------------------------------------------------------------

void perception(Verdict& v) {
  double worst = 0.0;
  for (const std::string& id : builtin_furniture_ids()) {
    const AssemblyGraph g = load_furniture(id);
    const WorldState w = reset_world(g, g.base_poses, 1);
    PerceptionState ps = make_perception(g, 1);
    const auto& est = perceive(w, g, NoiseModel::none(), {}, ps);
    for (int k = 0; k < g.n_parts(); ++k) {
      if (!est[k].observed) worst = INFINITY;
      worst = std::max(worst, (est[k].pose.position - w.parts[k].pose.position).norm());
      worst = std::max(worst, geodesic_angle(est[k].pose.orientation, w.parts[k].pose.orientation));
    }
  }
  v.require(worst < 1e-9, "zero-noise error");

  const AssemblyGraph g = load_furniture("one_leg");
  const WorldState w = reset_world(g, g.base_poses, 3);
  FilterConfig fc;
  PerceptionState ps = make_perception(g, 9, fc);
  const NoiseModel noise;
  for (int i = 0; i < fc.warmup_frames; ++i) perceive(w, g, noise, fc, ps);
  int flipped = 0, accepted = 0;
  for (int f = 0; f < 1000; ++f)
    for (const Camera& cam : ps.cameras) {
      const auto frame = simulate_detections(w, g, cam, noise, ps.rng);
      for (const auto& d : frame) flipped += d.flipped;
      for (const auto& d : filter_frame(frame, ps.history, fc)) accepted += d.flipped;
    }
  const double rejected = flipped ? 1.0 - double(accepted) / flipped : 0.0;
  v.require(flipped > 0 && rejected >= 0.99, "flip rejection");

  const int top = g.part_index("tabletop");
  const Pose truth = w.parts[top].pose;
  Rng rng(77);
  const NoiseModel gauss{0.005, 0.03, 0.0, 0.0};
  double se[3] = {0, 0, 0};
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    std::array<std::optional<Pose>, 2> cam;
    for (const Camera& c : default_cameras()) {
      std::vector<MarkerDetection> mine;
      for (const auto& d : simulate_detections(w, g, c, gauss, rng))
        if (d.part == top) mine.push_back(d);
      cam[static_cast<int>(c.id)] = part_pose_from_markers(mine, g.parts[top]);
    }
    if (!cam[0] || !cam[1]) {
      v.require(false, "both cameras see the tabletop");
      return;
    }
    const auto fused = fuse_estimates(cam[0], cam[1]);
    se[0] += (cam[0]->position - truth.position).squaredNorm();
    se[1] += (cam[1]->position - truth.position).squaredNorm();
    se[2] += (fused->position - truth.position).squaredNorm();
  }
  const double rf = std::sqrt(se[0] / trials), rr = std::sqrt(se[1] / trials), rx = std::sqrt(se[2] / trials);
  v.require(rx < rf && rx < rr, "fused RMSE below each camera");
  v.why << "zero-noise error " << worst << "; " << rejected * 100 << "% of " << flipped
        << " flips rejected; RMSE front " << rf * 1e3 << " mm, rear " << rr * 1e3 << " mm, fused " << rx * 1e3
        << " mm";
}

// --- 7 ---------------------------------------------------------------------------

double uniform_p(const std::vector<double>& xs, double lo, double hi, int bins) {
  std::vector<double> count(bins, 0.0);
  for (double x : xs) count[std::min(bins - 1, static_cast<int>((x - lo) / (hi - lo) * bins))] += 1;
  const double e = static_cast<double>(xs.size()) / bins;
  double stat = 0;
  for (double c : count) stat += (c - e) * (c - e) / e;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(bins - 1), stat));
}

void init(Verdict& v) {
  const AssemblyGraph g = load_furniture("one_leg");
  std::vector<double> dx, dy, da;
  bool bounded = true;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const auto p = sample_initial_poses(g, Level::Medium, {}, s, false);
    for (int k = 0; k < g.n_parts(); ++k) {
      const Vec3 d = p[k].position - g.base_poses[k].position;
      const double a = wrap_angle(yaw_of(p[k].orientation) - yaw_of(g.base_poses[k].orientation));
      bounded &= std::abs(d.x()) <= 0.05 && std::abs(d.y()) <= 0.05 && std::abs(a) <= kPi / 4 + 1e-12;
      if (k == 0) {
        dx.push_back(d.x());
        dy.push_back(d.y());
        da.push_back(a);
      }
    }
  }
  const double p = std::min({uniform_p(dx, -0.05, 0.05, 20), uniform_p(dy, -0.05, 0.05, 20),
                             uniform_p(da, -kPi / 4, kPi / 4, 20)});
  v.require(bounded, "medium bounds");
  v.require(p > 0.01, "medium uniformity");

  std::vector<std::vector<Pose>> seen;
  for (std::uint64_t s = 0; s < 30; ++s) seen.push_back(sample_initial_poses(g, Level::High, {}, s, true));
  std::vector<std::vector<Pose>> distinct;
  for (const auto& c : seen)
    if (std::find(distinct.begin(), distinct.end(), c) == distinct.end()) distinct.push_back(c);
  bool cycles = distinct.size() == 3;
  for (std::size_t s = 3; s < seen.size(); ++s) cycles &= seen[s] == seen[s % 3];
  v.require(cycles, "eval mode cycles 3 configurations");

  int overlaps = 0, samples = 0;
  for (const std::string& id : builtin_furniture_ids()) {
    const AssemblyGraph gi = load_furniture(id);
    for (std::uint64_t s = 0; s < 1000; ++s, ++samples) {
      const auto q = sample_initial_poses(gi, Level::High, {}, s, false);
      for (int i = 0; i < gi.n_parts(); ++i)
        for (int j = 0; j < i; ++j)
          overlaps += std::hypot(q[i].position.x() - q[j].position.x(), q[i].position.y() - q[j].position.y()) <
                      gi.parts[i].footprint_radius + gi.parts[j].footprint_radius;
    }
  }
  v.require(overlaps == 0, "high samples overlap");
  v.why << "1e4 medium samples in bounds, min p " << p << "; eval cycle of " << distinct.size() << "; " << overlaps
        << " overlaps in " << samples << " high samples";
}

// --- 8 ---------------------------------------------------------------------------

void termination(Verdict& v) {
  auto run = [](RunConfig cfg, const std::function<Action(int)>& policy, int limit) {
    Env env(cfg);
    env.reset(0);
    StepResult r;
    int n = 0;
    while (!r.done && n < limit) r = env.step(policy(++n));
    return std::make_pair(n, r.info.termination_cause);
  };
  const auto idle = run(config_for("one_leg"), [](int) { return Action::zero(); }, 100);
  v.require(idle.first == 50 && idle.second == TerminationCause::NoMotion, "no_motion at 50");
  const auto out = run(config_for("one_leg"), [](int) { return move(0.1, 0, 0); }, 50);
  v.require(out.second == TerminationCause::Unsafe, "unsafe");
  auto wiggle = [](int i) { return move(0, 0, i % 2 ? 0.01 : -0.01); };
  const auto skill = run(config_for("one_leg"), wiggle, 5000);
  v.require(skill.first == 351 && skill.second == TerminationCause::MaxSkill, "max_skill after 350");
  RunConfig long_skill = config_for("one_leg");
  long_skill.termination.max_steps_per_skill = 100000;
  const auto total = run(long_skill, wiggle, 5000);
  v.require(total.first == 3000 && total.second == TerminationCause::MaxTotal, "max_total at 3000");
  v.why << "no_motion@" << idle.first << ", unsafe@" << out.first << ", max_skill@" << skill.first
        << ", max_total@" << total.first;
}

// --- 9 ---------------------------------------------------------------------------

void image(Verdict& v) {
  Rng rng(3);
  Image src(1280, 720);
  for (auto& b : src.data) b = static_cast<std::uint8_t>(rng.uniform_int(256));
  v.require(front_intermediate_size(1280, 720) == std::make_pair(455, 256), "455x256");
  const Image out = preprocess_image(src, ImageRole::Front);
  v.require(out.width == 224 && out.height == 224, "224x224");
  const Image mid = resize_area(src, 455, 256);
  bool crop = true;
  for (int y = 0; y < 224; y += 37)
    for (int x = 0; x < 224; x += 41) crop &= out.at(x, y, 0) == mid.at(x + 115, y + 16, 0);
  v.require(crop, "center crop");
  bool constant = true;
  for (int c : {0, 77, 255})
    for (ImageRole role : {ImageRole::Front, ImageRole::Wrist})
      for (std::uint8_t b : preprocess_image(Image(1280, 720, static_cast<std::uint8_t>(c)), role).data)
        constant &= b == c;
  v.require(constant, "constant invariance");
  Image wrist(224, 224);
  for (auto& b : wrist.data) b = static_cast<std::uint8_t>(rng.uniform_int(256));
  v.require(preprocess_image(wrist, ImageRole::Wrist) == wrist, "wrist identity");
  v.why << "1280x720 -> 455x256 -> 224x224, constant images unchanged, wrist 224 identity";
}

// --- 10 --------------------------------------------------------------------------

void determinism_and_dataset(Verdict& v) {
  const fs::path dir = fs::temp_directory_path() / "fbench_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  RunConfig cfg = config_for("one_leg");
  cfg.observation_channels.fused_part_poses = true;
  auto record = [&](std::uint64_t seed) {
    std::optional<Episode> ep;
    run_episode(cfg, load_furniture("one_leg"), seed, scripted_policy_factory(), Operator::Scripted, &ep);
    return *ep;
  };
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  };
  write_episode(record(5), dir / "a.jsonl");
  write_episode(record(5), dir / "b.jsonl");
  v.require(slurp(dir / "a.jsonl") == slurp(dir / "b.jsonl"), "byte-identical episodes");
  const Episode back = read_episode(dir / "a.jsonl");
  v.require(serialize_episode(back) == slurp(dir / "a.jsonl"), "write-read-reserialize");
  const ReplayReport rep = replay_episode(back);
  v.require(rep.max_deviation == 0.0 && !rep.first_divergent_step, "replay divergence 0");

  std::vector<Episode> synth;
  for (int i = 0; i < 10; ++i) {
    Episode ep;
    ep.header.furniture_id = "one_leg";
    for (int k = 1; k <= 100; ++k) {
      StepRecord s;
      s.tick = 99 * k;
      ep.steps.push_back(s);
    }
    synth.push_back(ep);
  }
  const auto rows = compute_stats(synth, 10.0);
  // 10 episodes x 100 steps at 10 Hz: 1000 steps, 100 s, 1/36 h.
  v.require(rows.size() == 1 && rows[0].count == 10 && rows[0].avg_length == 100.0 &&
                std::abs(rows[0].total_hours - 1.0 / 36.0) < 1e-15,
            "stats");
  fs::remove_all(dir);
  v.why << "identical bytes, reserialize identical, replay max deviation " << rep.max_deviation << ", stats avg "
        << (rows.empty() ? 0.0 : rows[0].avg_length) << " steps / " << (rows.empty() ? 0.0 : rows[0].total_hours)
        << " h";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> checks = {
      {"reward-oracle", reward_oracle},
      {"once-per-pair-reward", once_per_pair},
      {"expert-totals", expert_totals},
      {"controller-constants", controller_constants},
      {"screw", screw},
      {"perception", perception},
      {"init", init},
      {"termination", termination},
      {"image", image},
      {"determinism-dataset", determinism_and_dataset},
  };
  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    Verdict v;
    try {
      checks[i].second(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.why << "exception: " << e.what();
    }
    failed += !v.pass;
    std::printf("%s %2zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, checks[i].first.c_str(), v.why.str().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
