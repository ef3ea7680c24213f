#pragma once
// Rigid-transform and quaternion helpers shared by the whole stack.
//
// Quaternions are Eigen::Quaterniond, but every external representation
// (JSON, wire messages, episode files) uses (w, x, y, z) order. Eigen's
// coeffs() is (x, y, z, w), so always go through to_wxyz / from_wxyz.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace fbench {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

struct Pose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();

  static Pose identity() { return {}; }

  bool operator==(const Pose& o) const {
    return position == o.position && orientation.coeffs() == o.orientation.coeffs();
  }
};

inline Quat normalized(const Quat& q) {
  Quat out = q;
  out.normalize();
  return out;
}

inline Pose make_pose(const Vec3& p, const Quat& q = Quat::Identity()) {
  return {p, normalized(q)};
}

inline Pose translation(double x, double y, double z) { return {Vec3(x, y, z), Quat::Identity()}; }

inline Quat axis_angle(const Vec3& axis, double angle) {
  return Quat(Eigen::AngleAxisd(angle, axis.normalized()));
}

inline Quat rot_x(double a) { return axis_angle(Vec3::UnitX(), a); }
inline Quat rot_y(double a) { return axis_angle(Vec3::UnitY(), a); }
inline Quat rot_z(double a) { return axis_angle(Vec3::UnitZ(), a); }

inline std::array<double, 4> to_wxyz(const Quat& q) { return {q.w(), q.x(), q.y(), q.z()}; }

inline Quat from_wxyz(double w, double x, double y, double z) { return Quat(w, x, y, z); }

inline Quat from_wxyz(std::span<const double> c) {
  if (c.size() != 4) throw std::invalid_argument("quaternion needs 4 components");
  return Quat(c[0], c[1], c[2], c[3]);
}

/// a∘b: b expressed in a's frame, mapped to a's parent frame.
inline Pose compose_poses(const Pose& a, const Pose& b) {
  return {a.position + a.orientation * b.position, normalized(a.orientation * b.orientation)};
}

inline Pose inverse(const Pose& p) {
  const Quat qi = p.orientation.conjugate();
  return {-(qi * p.position), qi};
}

/// a⁻¹∘b, i.e. b seen from a.
inline Pose relative_pose(const Pose& a, const Pose& b) {
  const Quat qi = a.orientation.conjugate();
  return {qi * (b.position - a.position), normalized(qi * b.orientation)};
}

// Rotation angle of q1⁻¹q2 in [0, π]. The atan2 form keeps precision near 0
// where acos(|dot|) loses half the digits.
inline double geodesic_angle(const Quat& q1, const Quat& q2) {
  const Quat d = q1.conjugate() * q2;
  const double v = d.vec().norm();
  return 2.0 * std::atan2(v, std::abs(d.w()));
}

/// Sign-aligned normalized mean. All inputs are flipped into the hemisphere
/// of the first one before summing.
inline Quat average_quaternions(std::span<const Quat> qs) {
  if (qs.empty()) throw std::invalid_argument("no estimates");
  const Quat& ref = qs.front();
  Eigen::Vector4d acc = Eigen::Vector4d::Zero();
  for (const Quat& q : qs) {
    const double s = (ref.coeffs().dot(q.coeffs()) < 0.0) ? -1.0 : 1.0;
    acc += s * q.coeffs();
  }
  Quat out;
  out.coeffs() = acc;
  out.normalize();
  return out;
}

inline Quat average_quaternions(const std::vector<Quat>& qs) {
  return average_quaternions(std::span<const Quat>(qs.data(), qs.size()));
}

inline Mat3 to_matrix(const Quat& q) { return q.normalized().toRotationMatrix(); }

inline Quat from_matrix(const Mat3& m) { return normalized(Quat(m)); }

/// Rotation vector (axis * angle) of q, angle in [0, π].
inline Vec3 rotation_vector(const Quat& q) {
  Quat h = q.normalized();
  if (h.w() < 0.0) h.coeffs() = -h.coeffs();
  const double v = h.vec().norm();
  if (v < 1e-15) return 2.0 * h.vec();
  const double angle = 2.0 * std::atan2(v, h.w());
  return h.vec() * (angle / v);
}

inline Quat from_rotation_vector(const Vec3& r) {
  const double angle = r.norm();
  if (angle < 1e-15) return normalized(Quat(1.0, 0.5 * r.x(), 0.5 * r.y(), 0.5 * r.z()));
  return axis_angle(r / angle, angle);
}

/// Signed rotation of q about the unit axis (swing-twist decomposition), in (-π, π].
inline double twist_angle(const Quat& q, const Vec3& axis) {
  const double proj = q.vec().dot(axis);
  double w = q.w();
  double p = proj;
  if (w < 0.0) {
    w = -w;
    p = -p;
  }
  return 2.0 * std::atan2(p, w);
}

/// Yaw about world z of the rotated x axis.
inline double yaw_of(const Quat& q) {
  const Vec3 x = q * Vec3::UnitX();
  return std::atan2(x.y(), x.x());
}

inline double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a < 0) a += 2.0 * kPi;
  return a - kPi;
}

inline bool is_finite(const Pose& p) {
  return p.position.allFinite() && p.orientation.coeffs().allFinite();
}

/// Spherical interpolation on the short arc.
inline Quat slerp(const Quat& a, const Quat& b, double t) { return normalized(a.slerp(t, b)); }

}  // namespace fbench
