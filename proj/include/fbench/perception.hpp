#pragma once
// Simulated fiducial detections from two fixed cameras and the fusion chain:
// per-camera outlier filter against recent history, per-part canonical pose
// from all of its markers, then the average over cameras.

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fbench/catalog.hpp"
#include "fbench/geometry.hpp"
#include "fbench/rng.hpp"
#include "fbench/world.hpp"

namespace fbench {

enum class CameraId { Front = 0, Rear = 1 };

inline std::string to_string(CameraId c) { return c == CameraId::Front ? "front" : "rear"; }

struct Camera {
  CameraId id;
  Vec3 position;
};

/// Front camera looks at the table from -y, rear from +y, both 0.5 m up.
inline std::array<Camera, 2> default_cameras() {
  return {Camera{CameraId::Front, Vec3(0.0, -0.7, 0.5)}, Camera{CameraId::Rear, Vec3(0.0, 0.7, 0.5)}};
}

struct NoiseModel {
  double translation_sigma = 0.005;
  double rotation_sigma = 0.03;
  double dropout_probability = 0.1;
  double flip_probability = 0.02;

  static NoiseModel none() { return {0.0, 0.0, 0.0, 0.0}; }

  void validate() const {
    if (!(translation_sigma >= 0 && rotation_sigma >= 0)) throw std::invalid_argument("noise sigmas must be >= 0");
    for (double p : {dropout_probability, flip_probability})
      if (!(p >= 0 && p <= 1)) throw std::invalid_argument("noise probabilities must be in [0, 1]");
  }

  bool operator==(const NoiseModel&) const = default;
};

struct FilterConfig {
  std::size_t history_size = 5;
  double translation_threshold = 0.030;
  double rotation_threshold = deg2rad(20.0);
  // A marker that really moved is rejected against stale history; this many
  // consecutive mutually consistent rejects replace the history.
  std::size_t reacquire_count = 3;
  int staleness_cap = 10;  // frames without a fused estimate before "unobserved"
  int warmup_frames = 5;

  bool operator==(const FilterConfig&) const = default;
};

struct MarkerDetection {
  CameraId camera = CameraId::Front;
  int marker_id = 0;
  int part = -1;
  Pose pose;  // marker in the world frame
  std::int64_t tick = 0;
  bool flipped = false;  // ground-truth label, for diagnostics only
};

/// Marker is seen when its face normal points within 80° of the camera.
inline bool marker_visible(const Pose& marker_world, const Camera& cam) {
  const Vec3 normal = marker_world.orientation * Vec3::UnitZ();
  const Vec3 to_cam = (cam.position - marker_world.position).normalized();
  return normal.dot(to_cam) > std::cos(deg2rad(80.0));
}

inline std::vector<MarkerDetection> simulate_detections(const WorldState& world, const AssemblyGraph& graph,
                                                        const Camera& cam, const NoiseModel& noise, Rng& rng) {
  std::vector<MarkerDetection> out;
  for (int k = 0; k < graph.n_parts(); ++k) {
    for (const MarkerSpec& m : graph.parts[k].markers) {
      const Pose truth = compose_poses(world.parts[k].pose, m.pose);
      if (!marker_visible(truth, cam)) continue;
      if (rng.bernoulli(noise.dropout_probability)) continue;
      MarkerDetection d;
      d.camera = cam.id;
      d.marker_id = m.id;
      d.part = k;
      d.tick = world.tick;
      d.pose = truth;
      if (noise.translation_sigma > 0)
        d.pose.position += noise.translation_sigma * Vec3(rng.normal(), rng.normal(), rng.normal());
      if (noise.rotation_sigma > 0) {
        const Vec3 r = noise.rotation_sigma * Vec3(rng.normal(), rng.normal(), rng.normal());
        d.pose.orientation = normalized(from_rotation_vector(r) * d.pose.orientation);
      }
      if (rng.bernoulli(noise.flip_probability)) {
        const Vec3 axes[3] = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
        d.pose.orientation = normalized(d.pose.orientation * axis_angle(axes[rng.uniform_int(3)], kPi));
        d.flipped = true;
      }
      out.push_back(d);
    }
  }
  return out;
}

/// Accepted detections per (camera, marker), oldest first.
class DetectionHistory {
 public:
  using Key = std::pair<int, int>;  // (camera, marker)

  explicit DetectionHistory(std::size_t capacity = 5) : capacity_(capacity) {}

  const std::deque<Pose>& entries(CameraId cam, int marker) const {
    static const std::deque<Pose> empty;
    auto it = accepted_.find(key(cam, marker));
    return it == accepted_.end() ? empty : it->second;
  }

  void push(CameraId cam, int marker, const Pose& p) {
    auto& q = accepted_[key(cam, marker)];
    q.push_back(p);
    while (q.size() > capacity_) q.pop_front();
  }

  std::vector<Pose>& rejected_streak(CameraId cam, int marker) { return rejected_[key(cam, marker)]; }

  void replace(CameraId cam, int marker, const std::vector<Pose>& poses) {
    auto& q = accepted_[key(cam, marker)];
    q.assign(poses.begin(), poses.end());
    while (q.size() > capacity_) q.pop_front();
  }

  std::size_t capacity() const { return capacity_; }
  void clear() {
    accepted_.clear();
    rejected_.clear();
  }

 private:
  static Key key(CameraId cam, int marker) { return {static_cast<int>(cam), marker}; }
  std::size_t capacity_;
  std::map<Key, std::deque<Pose>> accepted_;
  std::map<Key, std::vector<Pose>> rejected_;
};

/// Per-axis median position and the medoid orientation of the history.
inline Pose median_pose(const std::deque<Pose>& h) {
  if (h.empty()) throw std::invalid_argument("empty history");
  Vec3 med;
  for (int a = 0; a < 3; ++a) {
    std::vector<double> v;
    for (const Pose& p : h) v.push_back(p.position[a]);
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    med[a] = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  }
  std::size_t best = 0;
  double best_cost = INFINITY;
  for (std::size_t i = 0; i < h.size(); ++i) {
    double cost = 0;
    for (const Pose& p : h) cost += geodesic_angle(h[i].orientation, p.orientation);
    if (cost < best_cost) {
      best_cost = cost;
      best = i;
    }
  }
  return {med, h[best].orientation};
}

inline bool pose_close(const Pose& a, const Pose& b, const FilterConfig& cfg) {
  return (a.position - b.position).norm() <= cfg.translation_threshold &&
         geodesic_angle(a.orientation, b.orientation) <= cfg.rotation_threshold;
}

enum class FilterVerdict { Accept, Reject };

/// Verdict against the history as it stands; does not modify it.
inline FilterVerdict judge(const MarkerDetection& c, const DetectionHistory& h, const FilterConfig& cfg) {
  const auto& e = h.entries(c.camera, c.marker_id);
  if (e.size() < cfg.history_size) return FilterVerdict::Accept;
  return pose_close(c.pose, median_pose(e), cfg) ? FilterVerdict::Accept : FilterVerdict::Reject;
}

/// Judge one candidate and record it: accepted ones enter the ring buffer.
inline FilterVerdict filter_outlier(const MarkerDetection& c, DetectionHistory& h, const FilterConfig& cfg = {}) {
  const FilterVerdict v = judge(c, h, cfg);
  auto& streak = h.rejected_streak(c.camera, c.marker_id);
  if (v == FilterVerdict::Accept) {
    h.push(c.camera, c.marker_id, c.pose);
    streak.clear();
    return v;
  }
  if (!streak.empty() && !pose_close(streak.back(), c.pose, cfg)) streak.clear();
  streak.push_back(c.pose);
  if (cfg.reacquire_count > 0 && streak.size() >= cfg.reacquire_count) {
    h.replace(c.camera, c.marker_id, streak);
    streak.clear();
  }
  return v;
}

/// Filter one frame; every candidate is judged against the same snapshot.
inline std::vector<MarkerDetection> filter_frame(const std::vector<MarkerDetection>& frame, DetectionHistory& h,
                                                 const FilterConfig& cfg = {}) {
  std::vector<FilterVerdict> verdicts;
  for (const MarkerDetection& d : frame) verdicts.push_back(judge(d, h, cfg));
  std::vector<MarkerDetection> accepted;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    filter_outlier(frame[i], h, cfg);
    if (verdicts[i] == FilterVerdict::Accept) accepted.push_back(frame[i]);
  }
  return accepted;
}

inline const MarkerSpec* find_marker(const PartSpec& part, int marker_id) {
  for (const MarkerSpec& m : part.markers)
    if (m.id == marker_id) return &m;
  return nullptr;
}

/// Canonical part pose from one camera's detections of that part.
inline std::optional<Pose> part_pose_from_markers(const std::vector<MarkerDetection>& dets, const PartSpec& part) {
  Vec3 sum = Vec3::Zero();
  std::vector<Quat> qs;
  for (const MarkerDetection& d : dets) {
    const MarkerSpec* m = find_marker(part, d.marker_id);
    if (!m) continue;
    const Pose p = compose_poses(d.pose, inverse(m->pose));
    sum += p.position;
    qs.push_back(p.orientation);
  }
  if (qs.empty()) return std::nullopt;
  return Pose{sum / static_cast<double>(qs.size()), average_quaternions(qs)};
}

inline std::optional<Pose> fuse_estimates(const std::optional<Pose>& front, const std::optional<Pose>& rear) {
  if (front && rear) {
    const Quat q = average_quaternions(std::vector<Quat>{front->orientation, rear->orientation});
    return Pose{0.5 * (front->position + rear->position), q};
  }
  if (front) return front;
  return rear;
}

struct PartEstimate {
  Pose pose;
  bool observed = false;  // false before the first fix or once stale past the cap
  int staleness = 0;      // frames since the last fused estimate
};

/// Everything perception keeps between frames for one environment.
struct PerceptionState {
  DetectionHistory history;
  std::vector<PartEstimate> estimates;
  std::vector<char> ever_seen;
  Rng rng;
  std::array<Camera, 2> cameras = default_cameras();
};

inline PerceptionState make_perception(const AssemblyGraph& g, std::uint64_t seed, const FilterConfig& cfg = {}) {
  PerceptionState p{DetectionHistory(cfg.history_size), std::vector<PartEstimate>(g.n_parts()),
                    std::vector<char>(g.n_parts(), 0), Rng::stream(seed, 3), default_cameras()};
  return p;
}

/// Run one perception frame and update the fused per-part estimates.
inline const std::vector<PartEstimate>& perceive(const WorldState& world, const AssemblyGraph& g,
                                                 const NoiseModel& noise, const FilterConfig& cfg,
                                                 PerceptionState& ps) {
  std::array<std::vector<std::optional<Pose>>, 2> per_cam;
  for (const Camera& cam : ps.cameras) {
    const auto accepted = filter_frame(simulate_detections(world, g, cam, noise, ps.rng), ps.history, cfg);
    std::vector<std::vector<MarkerDetection>> by_part(g.n_parts());
    for (const MarkerDetection& d : accepted) by_part[d.part].push_back(d);
    auto& out = per_cam[static_cast<int>(cam.id)];
    for (int k = 0; k < g.n_parts(); ++k) out.push_back(part_pose_from_markers(by_part[k], g.parts[k]));
  }
  for (int k = 0; k < g.n_parts(); ++k) {
    PartEstimate& e = ps.estimates[k];
    if (auto fused = fuse_estimates(per_cam[0][k], per_cam[1][k])) {
      e.pose = *fused;
      e.staleness = 0;
      ps.ever_seen[k] = 1;
    } else {
      ++e.staleness;
    }
    e.observed = ps.ever_seen[k] && e.staleness <= cfg.staleness_cap;
  }
  return ps.estimates;
}

}  // namespace fbench
