#pragma once
// Furniture models as assembly graphs: parts with footprints, grasp frames
// and marker layouts; mating pairs with their assembled relative pose; and
// the ordered phase list used for progress scoring.
//
// Part frames sit at the part's center with z up when the part rests on the
// table, and coincide with the frame of the part's smallest-ID marker up to
// translation (the fused estimate reports that canonical frame).

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbench/geometry.hpp"
#include "fbench/json_util.hpp"
#include "fbench/workspace.hpp"

namespace fbench {

inline constexpr int kCatalogFormatVersion = 1;

enum class Mechanic { Insert, Screw, Slide };

inline std::string to_string(Mechanic m) {
  switch (m) {
    case Mechanic::Insert: return "insert";
    case Mechanic::Screw: return "screw";
    case Mechanic::Slide: return "slide";
  }
  return "?";
}

inline Mechanic mechanic_from_string(const std::string& s, const std::string& where) {
  if (s == "insert") return Mechanic::Insert;
  if (s == "screw") return Mechanic::Screw;
  if (s == "slide") return Mechanic::Slide;
  throw FormatError(where, "unknown mechanic '" + s + "'");
}

struct MarkerSpec {
  int id = 0;
  Pose pose;  // marker frame in the part frame; marker z is the face normal
};

struct PartSpec {
  std::string id;
  double footprint_radius = 0.0;  // bounding circle in the table plane, m
  double height = 0.0;            // extent along part z, m
  double graspable_width = 0.0;   // m
  std::vector<Pose> grasp_frames;
  std::vector<MarkerSpec> markers;

  /// z of the part frame when resting on the table.
  double rest_height() const { return 0.5 * height; }
};

/// part_b is the moving part; it mates onto part_a. frame_a and frame_b are
/// expressed in their own part frames and coincide when assembled.
struct PairSpec {
  int part_a = -1;
  int part_b = -1;
  Pose frame_a;
  Pose frame_b;
  Mechanic mechanic = Mechanic::Insert;
  double screw_travel = 0.03;       // axial thread length above the seat, m
  double approach_corridor = 0.03;  // slide entry length, m
  Pose gt_relative_pose;            // part_b in part_a's frame when assembled
};

enum class PhaseKind { Grasped, Placed, Inserted, Assembled };

inline std::string to_string(PhaseKind k) {
  switch (k) {
    case PhaseKind::Grasped: return "grasped";
    case PhaseKind::Placed: return "placed";
    case PhaseKind::Inserted: return "inserted";
    case PhaseKind::Assembled: return "assembled";
  }
  return "?";
}

struct PhaseSpec {
  PhaseKind kind = PhaseKind::Grasped;
  int part = -1;  // Grasped, Placed
  int pair = -1;  // Inserted, Assembled
  // Placed: target center in the table plane and optional yaw.
  double target_x = 0.0;
  double target_y = 0.0;
  double tolerance = 0.015;
  std::optional<double> target_yaw;
  double yaw_tolerance = deg2rad(20.0);
  std::string label;
};

struct SkillStart {
  std::vector<Pose> part_poses;
  Pose ee_pose;
};

struct AssemblyGraph {
  std::string furniture_id;
  std::vector<PartSpec> parts;
  std::vector<PairSpec> pairs;
  std::vector<PhaseSpec> phases;
  std::vector<Pose> base_poses;                      // canonical low-randomness layout
  std::vector<std::vector<Pose>> high_eval_configs;  // exactly three
  std::vector<SkillStart> skill_starts;              // reference states for skills 1..5

  int n_parts() const { return static_cast<int>(parts.size()); }
  int max_reward() const { return n_parts() - 1; }

  int part_index(const std::string& id) const {
    for (int i = 0; i < n_parts(); ++i)
      if (parts[i].id == id) return i;
    return -1;
  }

  /// Index of the pair in which `part` is the moving part, or -1.
  int pair_moving(int part) const {
    for (int k = 0; k < static_cast<int>(pairs.size()); ++k)
      if (pairs[k].part_b == part) return k;
    return -1;
  }
};

class FurnitureNotFound : public std::runtime_error {
 public:
  explicit FurnitureNotFound(const std::string& id) : std::runtime_error("furniture not found: " + id) {}
};

inline Pose gt_from_frames(const Pose& frame_a, const Pose& frame_b) {
  return compose_poses(frame_a, inverse(frame_b));
}

/// Structural checks; throws FormatError naming the offending element.
inline void validate(const AssemblyGraph& g) {
  const std::string where = "/" + g.furniture_id;
  if (g.furniture_id.empty()) throw FormatError("", "furniture_id is empty");
  if (g.parts.size() < 2) throw FormatError(where, "need at least two parts");
  std::set<std::string> part_ids;
  std::set<int> marker_ids;
  for (const PartSpec& p : g.parts) {
    const std::string pw = where + "/parts/" + p.id;
    if (!part_ids.insert(p.id).second) throw FormatError(pw, "duplicate part id");
    if (!(p.footprint_radius > 0.0)) throw FormatError(pw, "footprint must be positive");
    if (!(p.height > 0.0)) throw FormatError(pw, "height must be positive");
    if (!(p.graspable_width > 0.0)) throw FormatError(pw, "graspable_width must be positive");
    if (p.grasp_frames.empty()) throw FormatError(pw, "needs at least one grasp frame");
    if (p.markers.empty()) throw FormatError(pw, "needs at least one marker");
    for (const MarkerSpec& m : p.markers)
      if (!marker_ids.insert(m.id).second)
        throw FormatError(pw, "duplicate marker id " + std::to_string(m.id));
    const auto smallest = std::min_element(p.markers.begin(), p.markers.end(),
                                           [](const MarkerSpec& a, const MarkerSpec& b) { return a.id < b.id; });
    if (geodesic_angle(smallest->pose.orientation, Quat::Identity()) > 1e-9)
      throw FormatError(pw, "smallest-ID marker must share the part frame orientation");
  }
  const int n = g.n_parts();
  if (static_cast<int>(g.pairs.size()) != n - 1) throw FormatError(where, "pairs must number N-1");
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::set<int> moving;
  for (std::size_t k = 0; k < g.pairs.size(); ++k) {
    const PairSpec& pr = g.pairs[k];
    const std::string pw = where + "/pairs/" + std::to_string(k);
    if (pr.part_a < 0 || pr.part_a >= n || pr.part_b < 0 || pr.part_b >= n) throw FormatError(pw, "bad part index");
    if (pr.part_a == pr.part_b) throw FormatError(pw, "pair frames must belong to distinct parts");
    if (!moving.insert(pr.part_b).second) throw FormatError(pw, "part is the moving part of two pairs");
    const Pose gt = gt_from_frames(pr.frame_a, pr.frame_b);
    if ((gt.position - pr.gt_relative_pose.position).norm() > 1e-9 ||
        geodesic_angle(gt.orientation, pr.gt_relative_pose.orientation) > 1e-9)
      throw FormatError(pw, "gt_relative_pose disagrees with frame_a * inverse(frame_b)");
    if (pr.mechanic == Mechanic::Screw && !(pr.screw_travel > 0.0)) throw FormatError(pw, "screw_travel must be positive");
    if (pr.mechanic == Mechanic::Slide && !(pr.approach_corridor > 0.0))
      throw FormatError(pw, "approach_corridor must be positive");
    parent[find(pr.part_a)] = find(pr.part_b);
  }
  for (int i = 1; i < n; ++i)
    if (find(i) != find(0)) throw FormatError(where, "pair graph is not connected");
  if (g.phases.empty()) throw FormatError(where, "no phases");
  for (std::size_t k = 0; k < g.phases.size(); ++k) {
    const PhaseSpec& ph = g.phases[k];
    const std::string pw = where + "/phases/" + std::to_string(k);
    const bool needs_part = ph.kind == PhaseKind::Grasped || ph.kind == PhaseKind::Placed;
    if (needs_part && (ph.part < 0 || ph.part >= n)) throw FormatError(pw, "bad part reference");
    if (!needs_part && (ph.pair < 0 || ph.pair >= static_cast<int>(g.pairs.size())))
      throw FormatError(pw, "bad pair reference");
  }
  auto check_layout = [&](const std::vector<Pose>& poses, const std::string& what) {
    if (static_cast<int>(poses.size()) != n) throw FormatError(where + "/" + what, "expected one pose per part");
    for (const Pose& p : poses)
      if (!is_finite(p)) throw FormatError(where + "/" + what, "non-finite pose");
  };
  check_layout(g.base_poses, "base_poses");
  if (g.high_eval_configs.size() != 3) throw FormatError(where, "expected exactly 3 high_eval_configs");
  for (std::size_t k = 0; k < 3; ++k) check_layout(g.high_eval_configs[k], "high_eval_configs/" + std::to_string(k));
  if (g.skill_starts.size() < 5) throw FormatError(where, "expected 5 skill_starts");
  for (std::size_t k = 0; k < g.skill_starts.size(); ++k)
    check_layout(g.skill_starts[k].part_poses, "skill_starts/" + std::to_string(k));
}

// ---------------------------------------------------------------------------
// Built-in models.

namespace detail {

/// EE home orientation: gripper pointing down (EE z along world -z).
inline Quat gripper_down() { return rot_x(kPi); }

class CatalogBuilder {
 public:
  explicit CatalogBuilder(std::string id, Workspace ws = default_workspace()) : ws_(std::move(ws)) {
    g_.furniture_id = std::move(id);
  }

  /// Upright part with a top marker (canonical), front (-y) and rear (+y) face markers.
  int part(const std::string& id, double radius, double height, double width, double x, double y) {
    PartSpec p;
    p.id = id;
    p.footprint_radius = radius;
    p.height = height;
    p.graspable_width = width;
    const double grasp_z = 0.5 * height - std::min(0.01, 0.25 * height);
    p.grasp_frames.push_back(translation(0, 0, grasp_z));
    const double side = 0.7 * radius;
    p.markers.push_back({next_marker_++, translation(0.3 * radius, 0, 0.5 * height)});
    p.markers.push_back({next_marker_++, make_pose(Vec3(0, -side, 0), rot_x(kPi / 2))});
    p.markers.push_back({next_marker_++, make_pose(Vec3(0, side, 0), rot_x(-kPi / 2))});
    g_.parts.push_back(p);
    g_.base_poses.push_back(translation(x, y, p.rest_height()));
    return g_.n_parts() - 1;
  }

  /// Vertical screw/insert joint: part_b's bottom seats on part_a at `seat` (part_a frame).
  int vertical_pair(int a, int b, const Vec3& seat, Mechanic m) {
    PairSpec pr;
    pr.part_a = a;
    pr.part_b = b;
    pr.frame_a = translation(seat.x(), seat.y(), seat.z());
    pr.frame_b = translation(0, 0, -0.5 * g_.parts[b].height);
    pr.mechanic = m;
    pr.gt_relative_pose = gt_from_frames(pr.frame_a, pr.frame_b);
    g_.pairs.push_back(pr);
    return static_cast<int>(g_.pairs.size()) - 1;
  }

  /// Horizontal slide joint along `axis` (unit, in part_a frame, pointing out
  /// of part_a). part_b's center ends at `seat` with identity relative yaw.
  int slide_pair(int a, int b, const Vec3& seat, const Vec3& axis) {
    PairSpec pr;
    pr.part_a = a;
    pr.part_b = b;
    const Quat q = Quat::FromTwoVectors(Vec3::UnitZ(), axis.normalized());
    pr.frame_a = make_pose(seat, q);
    pr.frame_b = make_pose(Vec3::Zero(), q);
    pr.mechanic = Mechanic::Slide;
    pr.gt_relative_pose = gt_from_frames(pr.frame_a, pr.frame_b);
    g_.pairs.push_back(pr);
    return static_cast<int>(g_.pairs.size()) - 1;
  }

  void grasp(int part, std::string label) { g_.phases.push_back({PhaseKind::Grasped, part, -1, 0, 0, 0.015, {}, deg2rad(20), std::move(label)}); }

  void place_in_corner(int part, std::string label, std::optional<double> yaw = {}) {
    const double r = g_.parts[part].footprint_radius;
    const Vec3 c = ws_.corner();
    PhaseSpec ph{PhaseKind::Placed, part, -1, c.x() - r, c.y() - r, 0.015, yaw, deg2rad(20), std::move(label)};
    g_.phases.push_back(ph);
  }

  void inserted(int pair, std::string label) { g_.phases.push_back({PhaseKind::Inserted, -1, pair, 0, 0, 0, {}, 0, std::move(label)}); }

  void assembled(int pair, std::string label) { g_.phases.push_back({PhaseKind::Assembled, -1, pair, 0, 0, 0, {}, 0, std::move(label)}); }

  /// grasp, insert, screw/slide (or grasp, insert for plain inserts).
  void mate_phases(int pair) {
    const PairSpec& pr = g_.pairs[pair];
    const std::string& b = g_.parts[pr.part_b].id;
    grasp(pr.part_b, "grasp " + b);
    if (pr.mechanic == Mechanic::Insert) {
      assembled(pair, "insert " + b);
      return;
    }
    inserted(pair, "insert " + b);
    assembled(pair, (pr.mechanic == Mechanic::Screw ? "screw " : "slide ") + b);
  }

  AssemblyGraph finish() {
    const int n = g_.n_parts();
    auto transformed = [&](double sx, double sy, double yaw) {
      std::vector<Pose> out;
      for (int i = 0; i < n; ++i) {
        const Pose& b = g_.base_poses[i];
        out.push_back(make_pose(Vec3(sx * b.position.x(), sy * b.position.y(), b.position.z()), rot_z(yaw * (1 + i % 3))));
      }
      return out;
    };
    g_.high_eval_configs = {transformed(1, 1, kPi / 2), transformed(-1, 1, kPi / 4), transformed(1, -1, -kPi / 3)};
    // Reference skill states: EE 5 cm above the point the skill starts working on.
    for (std::size_t k = 0; k < 5; ++k) {
      const PhaseSpec& ph = g_.phases[std::min(k, g_.phases.size() - 1)];
      Vec3 focus;
      if (ph.kind == PhaseKind::Grasped) {
        focus = compose_poses(g_.base_poses[ph.part], g_.parts[ph.part].grasp_frames.front()).position;
      } else if (ph.kind == PhaseKind::Placed) {
        focus = Vec3(ph.target_x, ph.target_y, g_.base_poses[ph.part].position.z());
      } else {
        const PairSpec& pr = g_.pairs[ph.pair];
        focus = compose_poses(g_.base_poses[pr.part_a], pr.frame_a).position;
      }
      g_.skill_starts.push_back({g_.base_poses, make_pose(focus + Vec3(0, 0, 0.05), gripper_down())});
    }
    validate(g_);
    return g_;
  }

  const PartSpec& spec(int i) const { return g_.parts[i]; }

 private:
  Workspace ws_;
  AssemblyGraph g_;
  int next_marker_ = 0;
};

inline AssemblyGraph build_one_leg() {
  CatalogBuilder b("one_leg");
  const int top = b.part("tabletop", 0.08, 0.02, 0.03, 0.0, 0.08);
  const int leg = b.part("leg", 0.02, 0.07, 0.025, -0.20, -0.15);
  const int p = b.vertical_pair(top, leg, Vec3(-0.05, -0.05, 0.01), Mechanic::Screw);
  b.grasp(top, "grasp tabletop");
  b.place_in_corner(top, "place tabletop in corner");
  b.mate_phases(p);
  return b.finish();
}

/// Upside-down tabletop with four legs; the top is turned 180° in the corner
/// after the first two legs so the remaining holes face the robot.
inline AssemblyGraph build_four_leg_table(const std::string& id, double top_r, double leg_r, double leg_h) {
  CatalogBuilder b(id);
  const int top = b.part("tabletop", top_r, 0.02, 0.03, 0.0, 0.08);
  const double lx[] = {-0.25, -0.05, 0.15, -0.25};
  const double ly[] = {-0.20, -0.20, -0.20, 0.06};
  int legs[4];
  for (int i = 0; i < 4; ++i) legs[i] = b.part("leg" + std::to_string(i + 1), leg_r, leg_h, 0.025, lx[i], ly[i]);
  const double h = 0.6 * top_r;
  const Vec3 seats[] = {{-h, -h, 0.01}, {h, -h, 0.01}, {h, h, 0.01}, {-h, h, 0.01}};
  int pairs[4];
  for (int i = 0; i < 4; ++i) pairs[i] = b.vertical_pair(top, legs[i], seats[i], Mechanic::Screw);
  b.grasp(top, "grasp tabletop");
  b.place_in_corner(top, "place tabletop in corner");
  b.mate_phases(pairs[0]);
  b.mate_phases(pairs[1]);
  b.grasp(top, "regrasp tabletop");
  b.place_in_corner(top, "turn tabletop in corner", kPi);
  b.mate_phases(pairs[2]);
  b.mate_phases(pairs[3]);
  return b.finish();
}

inline AssemblyGraph build_lamp() {
  CatalogBuilder b("lamp");
  const int base = b.part("base", 0.05, 0.03, 0.05, 0.0, 0.08);
  const int bulb = b.part("bulb", 0.025, 0.05, 0.04, -0.20, -0.15);
  const int hood = b.part("hood", 0.05, 0.05, 0.06, 0.15, -0.15);
  const int screw = b.vertical_pair(base, bulb, Vec3(0, 0, 0.015), Mechanic::Screw);
  const int cover = b.vertical_pair(bulb, hood, Vec3(0, 0, 0.015), Mechanic::Insert);
  b.grasp(base, "grasp base");
  b.place_in_corner(base, "place base in corner");
  b.mate_phases(screw);
  b.mate_phases(cover);
  return b.finish();
}

inline AssemblyGraph build_drawer() {
  CatalogBuilder b("drawer");
  const int body = b.part("body", 0.08, 0.06, 0.06, 0.0, 0.08);
  const int box1 = b.part("box1", 0.035, 0.025, 0.03, -0.20, -0.15);
  const int box2 = b.part("box2", 0.035, 0.025, 0.03, 0.15, -0.15);
  // Box centers end on the table plane inside the body; slots open toward -x.
  const double z = 0.0125 - 0.03;
  const int s1 = b.slide_pair(body, box1, Vec3(-0.02, -0.03, z), -Vec3::UnitX());
  const int s2 = b.slide_pair(body, box2, Vec3(-0.02, 0.03, z), -Vec3::UnitX());
  b.grasp(body, "grasp drawer body");
  b.place_in_corner(body, "place body in corner");
  b.mate_phases(s1);
  b.mate_phases(s2);
  return b.finish();
}

inline AssemblyGraph build_cabinet() {
  CatalogBuilder b("cabinet");
  const int body = b.part("body", 0.075, 0.08, 0.06, -0.02, 0.10);
  const int door1 = b.part("door1", 0.035, 0.06, 0.03, -0.25, -0.18);
  const int door2 = b.part("door2", 0.035, 0.06, 0.03, -0.03, -0.19);
  const int top = b.part("top", 0.05, 0.02, 0.03, 0.21, -0.18);
  const double z = 0.03 - 0.04;
  const int d1 = b.slide_pair(body, door1, Vec3(-0.03, -0.03, z), -Vec3::UnitX());
  const int d2 = b.slide_pair(body, door2, Vec3(-0.03, 0.03, z), -Vec3::UnitX());
  const int lid = b.vertical_pair(body, top, Vec3(0, 0, 0.04), Mechanic::Screw);
  b.grasp(body, "grasp cabinet body");
  b.place_in_corner(body, "place body in corner");
  b.mate_phases(d1);
  b.mate_phases(d2);
  b.mate_phases(lid);
  return b.finish();
}

inline AssemblyGraph build_round_table() {
  CatalogBuilder b("round_table");
  const int top = b.part("tabletop", 0.08, 0.02, 0.03, 0.0, 0.08);
  const int leg = b.part("leg", 0.025, 0.08, 0.03, -0.20, -0.15);
  const int base = b.part("base", 0.06, 0.02, 0.03, 0.17, -0.17);
  const int p1 = b.vertical_pair(top, leg, Vec3(0, 0, 0.01), Mechanic::Screw);
  const int p2 = b.vertical_pair(leg, base, Vec3(0, 0, 0.04), Mechanic::Screw);
  b.grasp(top, "grasp tabletop");
  b.place_in_corner(top, "place tabletop in corner");
  b.mate_phases(p1);
  b.mate_phases(p2);
  return b.finish();
}

inline AssemblyGraph build_stool() {
  CatalogBuilder b("stool");
  const int seat = b.part("seat", 0.07, 0.02, 0.03, 0.0, 0.08);
  const double lx[] = {-0.25, -0.05, 0.15};
  int legs[3];
  for (int i = 0; i < 3; ++i) legs[i] = b.part("leg" + std::to_string(i + 1), 0.02, 0.07, 0.025, lx[i], -0.20);
  b.grasp(seat, "grasp seat");
  b.place_in_corner(seat, "place seat in corner");
  for (int i = 0; i < 3; ++i) {
    const double a = 2.0 * kPi * i / 3.0 + kPi / 2;
    b.mate_phases(b.vertical_pair(seat, legs[i], Vec3(0.04 * std::cos(a), 0.04 * std::sin(a), 0.01), Mechanic::Screw));
  }
  return b.finish();
}

inline AssemblyGraph build_chair() {
  CatalogBuilder b("chair");
  const int seat = b.part("seat", 0.07, 0.02, 0.03, 0.0, 0.10);
  const int back = b.part("back", 0.04, 0.08, 0.03, -0.26, -0.20);
  const int leg1 = b.part("leg1", 0.015, 0.06, 0.02, -0.06, -0.23);
  const int leg2 = b.part("leg2", 0.015, 0.06, 0.02, 0.12, -0.23);
  const int nut1 = b.part("nut1", 0.012, 0.015, 0.015, -0.28, 0.12);
  const int nut2 = b.part("nut2", 0.012, 0.015, 0.015, 0.28, -0.15);
  b.grasp(seat, "grasp seat");
  b.place_in_corner(seat, "place seat in corner");
  b.mate_phases(b.vertical_pair(seat, leg1, Vec3(-0.04, -0.04, 0.01), Mechanic::Screw));
  b.mate_phases(b.vertical_pair(seat, leg2, Vec3(0.04, -0.04, 0.01), Mechanic::Screw));
  b.mate_phases(b.slide_pair(seat, back, Vec3(-0.02, 0.0, 0.05), -Vec3::UnitX()));
  b.mate_phases(b.vertical_pair(back, nut1, Vec3(0.0, -0.02, 0.04), Mechanic::Screw));
  b.mate_phases(b.vertical_pair(back, nut2, Vec3(0.0, 0.02, 0.04), Mechanic::Screw));
  return b.finish();
}

}  // namespace detail

inline const std::vector<std::string>& builtin_furniture_ids() {
  static const std::vector<std::string> ids = {"one_leg",     "lamp",        "square_table", "desk",  "drawer",
                                               "cabinet",     "round_table", "stool",        "chair"};
  return ids;
}

// ---------------------------------------------------------------------------
// Catalog file format (JSON, one furniture per document).

inline Json catalog_to_json(const AssemblyGraph& g) {
  Json parts = Json::array();
  for (const PartSpec& p : g.parts) {
    Json grasps = Json::array();
    for (const Pose& f : p.grasp_frames) grasps.push_back(pose_to_json(f));
    Json markers = Json::array();
    for (const MarkerSpec& m : p.markers) markers.push_back({{"id", m.id}, {"pose", pose_to_json(m.pose)}});
    parts.push_back({{"id", p.id},
                     {"footprint_radius", p.footprint_radius},
                     {"height", p.height},
                     {"graspable_width", p.graspable_width},
                     {"grasp_frames", grasps},
                     {"markers", markers}});
  }
  Json pairs = Json::array();
  for (const PairSpec& pr : g.pairs) {
    pairs.push_back({{"part_a", g.parts[pr.part_a].id},
                     {"frame_a", pose_to_json(pr.frame_a)},
                     {"part_b", g.parts[pr.part_b].id},
                     {"frame_b", pose_to_json(pr.frame_b)},
                     {"mechanic", to_string(pr.mechanic)},
                     {"screw_travel", pr.screw_travel},
                     {"approach_corridor", pr.approach_corridor},
                     {"gt_relative_pose", pose_to_json(pr.gt_relative_pose)}});
  }
  Json phases = Json::array();
  for (const PhaseSpec& ph : g.phases) {
    Json j{{"kind", to_string(ph.kind)}, {"label", ph.label}};
    if (ph.kind == PhaseKind::Grasped || ph.kind == PhaseKind::Placed) j["part"] = g.parts[ph.part].id;
    else j["pair"] = ph.pair;
    if (ph.kind == PhaseKind::Placed) {
      j["target"] = Json::array({ph.target_x, ph.target_y});
      j["tolerance"] = ph.tolerance;
      if (ph.target_yaw) {
        j["target_yaw"] = *ph.target_yaw;
        j["yaw_tolerance"] = ph.yaw_tolerance;
      }
    }
    phases.push_back(j);
  }
  auto layout = [](const std::vector<Pose>& poses) {
    Json a = Json::array();
    for (const Pose& p : poses) a.push_back(pose_to_json(p));
    return a;
  };
  Json high = Json::array();
  for (const auto& c : g.high_eval_configs) high.push_back(layout(c));
  Json skills = Json::array();
  for (const SkillStart& s : g.skill_starts)
    skills.push_back({{"part_poses", layout(s.part_poses)}, {"ee_pose", pose_to_json(s.ee_pose)}});
  return Json{{"format_version", kCatalogFormatVersion},
              {"furniture_id", g.furniture_id},
              {"parts", parts},
              {"pairs", pairs},
              {"phases", phases},
              {"base_poses", layout(g.base_poses)},
              {"high_eval_configs", high},
              {"skill_starts", skills}};
}

inline AssemblyGraph catalog_from_json(const Json& j) {
  const std::string root;
  require_keys(j, {"format_version", "furniture_id", "parts", "pairs", "phases", "base_poses", "high_eval_configs",
                   "skill_starts"},
               root);
  if (get_int(j, "format_version", root) != kCatalogFormatVersion)
    throw FormatError("/format_version", "unsupported catalog format_version");
  AssemblyGraph g;
  g.furniture_id = get_string(j, "furniture_id", root);
  auto array_at = [](const Json& parent, const std::string& key, const std::string& where) -> const Json& {
    const Json& a = field(parent, key, where);
    if (!a.is_array()) throw FormatError(where + "/" + key, "expected an array");
    return a;
  };
  const Json& parts = array_at(j, "parts", root);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string w = "/parts/" + std::to_string(i);
    const Json& pj = parts[i];
    require_keys(pj, {"id", "footprint_radius", "height", "graspable_width", "grasp_frames", "markers"}, w);
    PartSpec p;
    p.id = get_string(pj, "id", w);
    p.footprint_radius = get_number(pj, "footprint_radius", w);
    p.height = get_number(pj, "height", w);
    p.graspable_width = get_number(pj, "graspable_width", w);
    const Json& gf = array_at(pj, "grasp_frames", w);
    for (std::size_t k = 0; k < gf.size(); ++k) p.grasp_frames.push_back(pose_from_json(gf[k], w + "/grasp_frames/" + std::to_string(k)));
    const Json& mk = array_at(pj, "markers", w);
    for (std::size_t k = 0; k < mk.size(); ++k) {
      const std::string mw = w + "/markers/" + std::to_string(k);
      require_keys(mk[k], {"id", "pose"}, mw);
      p.markers.push_back({get_int(mk[k], "id", mw), pose_from_json(field(mk[k], "pose", mw), mw + "/pose")});
    }
    g.parts.push_back(std::move(p));
  }
  auto part_ref = [&](const std::string& id, const std::string& where) {
    const int k = g.part_index(id);
    if (k < 0) throw FormatError(where, "unknown part '" + id + "'");
    return k;
  };
  const Json& pairs = array_at(j, "pairs", root);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::string w = "/pairs/" + std::to_string(i);
    const Json& pj = pairs[i];
    require_keys(pj, {"part_a", "frame_a", "part_b", "frame_b", "mechanic", "screw_travel", "approach_corridor",
                      "gt_relative_pose"},
                 w);
    PairSpec pr;
    pr.part_a = part_ref(get_string(pj, "part_a", w), w + "/part_a");
    pr.part_b = part_ref(get_string(pj, "part_b", w), w + "/part_b");
    pr.frame_a = pose_from_json(field(pj, "frame_a", w), w + "/frame_a");
    pr.frame_b = pose_from_json(field(pj, "frame_b", w), w + "/frame_b");
    pr.mechanic = mechanic_from_string(get_string(pj, "mechanic", w), w + "/mechanic");
    if (pj.contains("screw_travel")) pr.screw_travel = get_number(pj, "screw_travel", w);
    if (pj.contains("approach_corridor")) pr.approach_corridor = get_number(pj, "approach_corridor", w);
    pr.gt_relative_pose = pj.contains("gt_relative_pose")
                              ? pose_from_json(pj["gt_relative_pose"], w + "/gt_relative_pose")
                              : gt_from_frames(pr.frame_a, pr.frame_b);
    g.pairs.push_back(pr);
  }
  const Json& phases = array_at(j, "phases", root);
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const std::string w = "/phases/" + std::to_string(i);
    const Json& pj = phases[i];
    require_keys(pj, {"kind", "label", "part", "pair", "target", "tolerance", "target_yaw", "yaw_tolerance"}, w);
    PhaseSpec ph;
    const std::string kind = get_string(pj, "kind", w);
    if (kind == "grasped") ph.kind = PhaseKind::Grasped;
    else if (kind == "placed") ph.kind = PhaseKind::Placed;
    else if (kind == "inserted") ph.kind = PhaseKind::Inserted;
    else if (kind == "assembled") ph.kind = PhaseKind::Assembled;
    else throw FormatError(w + "/kind", "unknown phase kind '" + kind + "'");
    if (pj.contains("label")) ph.label = get_string(pj, "label", w);
    if (ph.kind == PhaseKind::Grasped || ph.kind == PhaseKind::Placed) ph.part = part_ref(get_string(pj, "part", w), w + "/part");
    else ph.pair = get_int(pj, "pair", w);
    if (ph.kind == PhaseKind::Placed) {
      const Json& t = field(pj, "target", w);
      if (!t.is_array() || t.size() != 2) throw FormatError(w + "/target", "expected [x, y]");
      ph.target_x = number_at(t[0], w + "/target/0");
      ph.target_y = number_at(t[1], w + "/target/1");
      ph.tolerance = get_number(pj, "tolerance", w);
      if (pj.contains("target_yaw")) {
        ph.target_yaw = get_number(pj, "target_yaw", w);
        ph.yaw_tolerance = get_number(pj, "yaw_tolerance", w);
      }
    }
    g.phases.push_back(ph);
  }
  auto layout = [&](const Json& a, const std::string& w) {
    if (!a.is_array()) throw FormatError(w, "expected an array of poses");
    std::vector<Pose> out;
    for (std::size_t k = 0; k < a.size(); ++k) out.push_back(pose_from_json(a[k], w + "/" + std::to_string(k)));
    return out;
  };
  g.base_poses = layout(field(j, "base_poses", root), "/base_poses");
  const Json& high = array_at(j, "high_eval_configs", root);
  for (std::size_t k = 0; k < high.size(); ++k) g.high_eval_configs.push_back(layout(high[k], "/high_eval_configs/" + std::to_string(k)));
  const Json& skills = array_at(j, "skill_starts", root);
  for (std::size_t k = 0; k < skills.size(); ++k) {
    const std::string w = "/skill_starts/" + std::to_string(k);
    require_keys(skills[k], {"part_poses", "ee_pose"}, w);
    g.skill_starts.push_back({layout(field(skills[k], "part_poses", w), w + "/part_poses"),
                              pose_from_json(field(skills[k], "ee_pose", w), w + "/ee_pose")});
  }
  validate(g);
  return g;
}

/// Built-in id, or a path to a catalog JSON file.
inline AssemblyGraph load_furniture(const std::string& furniture_id) {
  using namespace detail;
  if (furniture_id == "one_leg") return build_one_leg();
  if (furniture_id == "lamp") return build_lamp();
  if (furniture_id == "square_table") return build_four_leg_table("square_table", 0.08, 0.02, 0.07);
  if (furniture_id == "desk") return build_four_leg_table("desk", 0.085, 0.022, 0.09);
  if (furniture_id == "drawer") return build_drawer();
  if (furniture_id == "cabinet") return build_cabinet();
  if (furniture_id == "round_table") return build_round_table();
  if (furniture_id == "stool") return build_stool();
  if (furniture_id == "chair") return build_chair();
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_regular_file(furniture_id, ec)) throw FurnitureNotFound(furniture_id);
  std::ifstream in(furniture_id);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const Json j = parse_json_text(text, furniture_id);
  try {
    return catalog_from_json(j);
  } catch (const FormatError& e) {
    throw FormatError(furniture_id, e.what());
  }
}

inline void write_catalog(const AssemblyGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << catalog_to_json(g).dump(2) << '\n';
}

}  // namespace fbench
