#pragma once
// The benchmark environment: reset/step at the action rate, observation
// assembly, sparse reward from fused estimates, phases and termination.

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/beast/core/detail/base64.hpp>

#include "fbench/catalog.hpp"
#include "fbench/config.hpp"
#include "fbench/controller.hpp"
#include "fbench/image.hpp"
#include "fbench/init_sampler.hpp"
#include "fbench/json_util.hpp"
#include "fbench/perception.hpp"
#include "fbench/render.hpp"
#include "fbench/reward.hpp"
#include "fbench/termination.hpp"
#include "fbench/world.hpp"

namespace fbench {

struct Observation {
  Vec3 ee_position = Vec3::Zero();
  Quat ee_orientation = Quat::Identity();
  Vec3 ee_linear_velocity = Vec3::Zero();
  Vec3 ee_angular_velocity = Vec3::Zero();
  double gripper_width = 0.0;
  std::optional<std::vector<PartEstimate>> fused_part_poses;
  std::optional<Image> image;

  bool operator==(const Observation& o) const {
    auto same_parts = [](const std::vector<PartEstimate>& a, const std::vector<PartEstimate>& b) {
      if (a.size() != b.size()) return false;
      for (std::size_t i = 0; i < a.size(); ++i)
        if (!(a[i].pose == b[i].pose) || a[i].observed != b[i].observed) return false;
      return true;
    };
    return ee_position == o.ee_position && ee_orientation.coeffs() == o.ee_orientation.coeffs() &&
           ee_linear_velocity == o.ee_linear_velocity && ee_angular_velocity == o.ee_angular_velocity &&
           gripper_width == o.gripper_width && fused_part_poses.has_value() == o.fused_part_poses.has_value() &&
           (!fused_part_poses || same_parts(*fused_part_poses, *o.fused_part_poses)) && image == o.image;
  }
};

/// Largest absolute difference over all numeric observation fields.
inline double observation_deviation(const Observation& a, const Observation& b) {
  double d = 0.0;
  auto upd = [&](double x) { d = std::max(d, std::isfinite(x) ? std::abs(x) : INFINITY); };
  for (int i = 0; i < 3; ++i) {
    upd(a.ee_position[i] - b.ee_position[i]);
    upd(a.ee_linear_velocity[i] - b.ee_linear_velocity[i]);
    upd(a.ee_angular_velocity[i] - b.ee_angular_velocity[i]);
  }
  upd(geodesic_angle(a.ee_orientation, b.ee_orientation));
  upd(a.gripper_width - b.gripper_width);
  if (a.fused_part_poses.has_value() != b.fused_part_poses.has_value()) return INFINITY;
  if (a.fused_part_poses) {
    if (a.fused_part_poses->size() != b.fused_part_poses->size()) return INFINITY;
    for (std::size_t k = 0; k < a.fused_part_poses->size(); ++k) {
      const auto &p = (*a.fused_part_poses)[k], &q = (*b.fused_part_poses)[k];
      upd((p.pose.position - q.pose.position).norm());
      upd(geodesic_angle(p.pose.orientation, q.pose.orientation));
      if (p.observed != q.observed) upd(1.0);
    }
  }
  if (a.image.has_value() != b.image.has_value()) return INFINITY;
  if (a.image) {
    if (a.image->width != b.image->width || a.image->height != b.image->height) return INFINITY;
    for (std::size_t i = 0; i < a.image->data.size(); ++i) upd(double(a.image->data[i]) - double(b.image->data[i]));
  }
  return d;
}

inline std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  namespace b64 = boost::beast::detail::base64;
  std::string out(b64::encoded_size(bytes.size()), '\0');
  out.resize(b64::encode(out.data(), bytes.data(), bytes.size()));
  return out;
}

inline std::vector<std::uint8_t> base64_decode(const std::string& text, const std::string& where) {
  namespace b64 = boost::beast::detail::base64;
  std::vector<std::uint8_t> out(b64::decoded_size(text.size()));
  const auto [written, read] = b64::decode(out.data(), text.data(), text.size());
  if (read != text.size()) throw FormatError(where, "invalid base64");
  out.resize(written);
  return out;
}

inline Json observation_to_json(const Observation& o) {
  Json j{{"ee_position", vec3_to_json(o.ee_position)},
         {"ee_orientation", quat_to_json(o.ee_orientation)},
         {"ee_linear_velocity", vec3_to_json(o.ee_linear_velocity)},
         {"ee_angular_velocity", vec3_to_json(o.ee_angular_velocity)},
         {"gripper_width", o.gripper_width}};
  if (o.fused_part_poses) {
    Json parts = Json::array();
    for (const PartEstimate& e : *o.fused_part_poses) {
      Json p = pose_to_json(e.pose);
      p["observed"] = e.observed;
      parts.push_back(p);
    }
    j["fused_part_poses"] = parts;
  }
  if (o.image)
    j["image"] = {{"width", o.image->width},
                  {"height", o.image->height},
                  {"encoding", "rgb8-base64"},
                  {"data", base64_encode(o.image->data)}};
  return j;
}

inline Observation observation_from_json(const Json& j, const std::string& w) {
  require_keys(j, {"ee_position", "ee_orientation", "ee_linear_velocity", "ee_angular_velocity", "gripper_width",
                   "fused_part_poses", "image"},
               w);
  Observation o;
  o.ee_position = vec3_from_json(field(j, "ee_position", w), w + "/ee_position");
  o.ee_orientation = quat_from_json(field(j, "ee_orientation", w), w + "/ee_orientation");
  o.ee_linear_velocity = vec3_from_json(field(j, "ee_linear_velocity", w), w + "/ee_linear_velocity");
  o.ee_angular_velocity = vec3_from_json(field(j, "ee_angular_velocity", w), w + "/ee_angular_velocity");
  o.gripper_width = get_number(j, "gripper_width", w);
  if (auto it = j.find("fused_part_poses"); it != j.end()) {
    if (!it->is_array()) throw FormatError(w + "/fused_part_poses", "expected an array");
    std::vector<PartEstimate> parts;
    for (std::size_t k = 0; k < it->size(); ++k) {
      const std::string pw = w + "/fused_part_poses/" + std::to_string(k);
      const Json& pj = (*it)[k];
      require_keys(pj, {"position", "orientation", "observed"}, pw);
      PartEstimate e;
      e.pose = {vec3_from_json(field(pj, "position", pw), pw + "/position"),
                quat_from_json(field(pj, "orientation", pw), pw + "/orientation")};
      const Json& obs = field(pj, "observed", pw);
      if (!obs.is_boolean()) throw FormatError(pw + "/observed", "expected a boolean");
      e.observed = obs.get<bool>();
      parts.push_back(e);
    }
    o.fused_part_poses = std::move(parts);
  }
  if (auto it = j.find("image"); it != j.end()) {
    const std::string iw = w + "/image";
    require_keys(*it, {"width", "height", "encoding", "data"}, iw);
    if (get_string(*it, "encoding", iw) != "rgb8-base64") throw FormatError(iw + "/encoding", "unsupported encoding");
    Image img;
    img.width = get_int(*it, "width", iw);
    img.height = get_int(*it, "height", iw);
    img.data = base64_decode(get_string(*it, "data", iw), iw + "/data");
    if (img.width <= 0 || img.height <= 0 || img.data.size() != static_cast<std::size_t>(img.width) * img.height * 3)
      throw FormatError(iw, "image size does not match its data");
    o.image = std::move(img);
  }
  return o;
}

struct StepInfo {
  int phase_completed = 0;
  std::set<int> assembled_pairs;        // rewarded from fused estimates
  std::set<int> world_assembled_pairs;  // simulator ground truth
  int ground_truth_reward = 0;          // same predicate on true poses
  int reward_total = 0;
  int ground_truth_reward_total = 0;
  std::optional<TerminationCause> termination_cause;
  std::vector<int> unobserved_parts;
};

struct StepResult {
  Observation observation;
  int reward = 0;
  bool done = false;
  StepInfo info;
};

class EpisodeFinished : public std::logic_error {
 public:
  EpisodeFinished() : std::logic_error("episode finished") {}
};

class Env {
 public:
  explicit Env(RunConfig cfg) : Env(cfg, load_furniture(cfg.furniture)) {}

  Env(RunConfig cfg, AssemblyGraph graph) : cfg_(std::move(cfg)), graph_(std::move(graph)) {
    cfg_.validate();
    plant_ = plant_config(cfg_.controller, cfg_.plant);
  }

  /// Sample the configured randomness level for `seed` and start an episode.
  Observation reset(std::uint64_t seed) {
    return reset_to(seed, sample_initial_poses(graph_, cfg_.level, cfg_.init, seed, cfg_.eval_mode, plant_.workspace));
  }

  /// Start an episode from explicit part poses (and optionally an EE pose).
  Observation reset_to(std::uint64_t seed, const std::vector<Pose>& part_poses, std::optional<Pose> ee = {}) {
    seed_ = seed;
    world_ = reset_world(graph_, part_poses, seed, plant_);
    if (ee) {
      world_.ee.pose = *ee;
      world_.ee.prev_pose = *ee;
    }
    perception_ = make_perception(graph_, seed, cfg_.filter);
    for (int i = 0; i < cfg_.filter.warmup_frames; ++i) perceive(world_, graph_, cfg_.noise, cfg_.filter, perception_);
    reward_ = RewardTracker(graph_, cfg_.reward);
    gt_reward_ = RewardTracker(graph_, cfg_.reward);
    phase_ = update_phase(PhaseState{}, world_, graph_);
    history_ = TerminationHistory{{world_.ee.pose.position}, 0, 0};
    done_ = false;
    cause_.reset();
    started_ = true;
    return observe();
  }

  StepResult step(const Action& action) {
    if (!started_) throw std::logic_error("step before reset");
    if (done_) throw EpisodeFinished();
    world_ = run_action(std::move(world_), graph_, action, cfg_.controller, plant_);
    const auto& est = perceive(world_, graph_, cfg_.noise, cfg_.filter, perception_);

    std::vector<std::optional<Pose>> est_poses, gt_poses;
    StepInfo info;
    for (int k = 0; k < graph_.n_parts(); ++k) {
      est_poses.push_back(est[k].observed ? std::optional<Pose>(est[k].pose) : std::nullopt);
      gt_poses.push_back(world_.parts[k].pose);
      if (!est[k].observed) info.unobserved_parts.push_back(k);
    }
    const int reward = reward_.update(est_poses, graph_);
    info.ground_truth_reward = gt_reward_.update(gt_poses, graph_);

    const int before = phase_.completed;
    phase_ = update_phase(std::move(phase_), world_, graph_);
    ++history_.total_steps;
    history_.steps_in_skill = phase_.completed != before ? 0 : history_.steps_in_skill + 1;
    history_.ee_positions.push_back(world_.ee.pose.position);

    if (reward_.total() == graph_.max_reward() &&
        static_cast<int>(world_.assembled_pairs.size()) == graph_.max_reward())
      cause_ = TerminationCause::Success;
    else
      cause_ = check_termination(history_, cfg_.termination, cfg_.controller.action_frequency);
    done_ = cause_.has_value();

    info.phase_completed = phase_.completed;
    info.assembled_pairs = reward_.rewarded();
    info.world_assembled_pairs = world_.assembled_pairs;
    info.reward_total = reward_.total();
    info.ground_truth_reward_total = gt_reward_.total();
    info.termination_cause = cause_;
    return {observe(), reward, done_, std::move(info)};
  }

  Observation observe() const {
    Observation o;
    o.ee_position = world_.ee.pose.position;
    o.ee_orientation = world_.ee.pose.orientation;
    o.ee_linear_velocity = world_.ee.linear_velocity;
    o.ee_angular_velocity = world_.ee.angular_velocity;
    o.gripper_width = world_.ee.gripper_width;
    if (cfg_.observation_channels.fused_part_poses) o.fused_part_poses = perception_.estimates;
    if (cfg_.observation_channels.image)
      o.image = preprocess_image(render_top_down(world_, graph_, plant_.workspace), ImageRole::Front);
    return o;
  }

  const RunConfig& config() const { return cfg_; }
  const AssemblyGraph& graph() const { return graph_; }
  const WorldState& world() const { return world_; }
  const WorldConfig& plant() const { return plant_; }
  const PhaseState& phase() const { return phase_; }
  const std::vector<PartEstimate>& estimates() const { return perception_.estimates; }
  int reward_total() const { return reward_.total(); }
  int steps() const { return history_.total_steps; }
  bool done() const { return done_; }
  std::optional<TerminationCause> cause() const { return cause_; }
  std::uint64_t seed() const { return seed_; }

 private:
  RunConfig cfg_;
  AssemblyGraph graph_;
  WorldConfig plant_;
  WorldState world_;
  PerceptionState perception_;
  RewardTracker reward_, gt_reward_;
  PhaseState phase_;
  TerminationHistory history_;
  std::optional<TerminationCause> cause_;
  std::uint64_t seed_ = 0;
  bool done_ = false;
  bool started_ = false;
};

}  // namespace fbench
