#include <gtest/gtest.h>

#include <random>

#include "fbench/geometry.hpp"
#include "fbench/rng.hpp"

using namespace fbench;

namespace {

// Homogeneous 4x4 built from explicit cos/sin, independent of the quaternion code.
Eigen::Matrix4d homog_rz(double a, const Vec3& t) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m(0, 0) = std::cos(a);
  m(0, 1) = -std::sin(a);
  m(1, 0) = std::sin(a);
  m(1, 1) = std::cos(a);
  m.block<3, 1>(0, 3) = t;
  return m;
}

Pose random_pose(Rng& rng) {
  Vec3 axis = rng.unit_vector();
  return make_pose(Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)),
                   axis_angle(axis, rng.uniform(0, kPi)));
}

}  // namespace

TEST(Compose, IdentityIsNeutral) {
  const Pose p = make_pose(Vec3(0.1, -0.2, 0.3), rot_y(0.4));
  const Pose a = compose_poses(Pose::identity(), p);
  const Pose b = compose_poses(p, Pose::identity());
  EXPECT_LT((a.position - p.position).norm(), 1e-15);
  EXPECT_LT(geodesic_angle(b.orientation, p.orientation), 1e-12);
}

TEST(Compose, InverseGivesIdentity) {
  const Pose p = make_pose(Vec3(0.1, -0.2, 0.3), axis_angle(Vec3(1, 2, 3), 1.1));
  const Pose e = compose_poses(p, inverse(p));
  EXPECT_LT(e.position.norm(), 1e-15);
  EXPECT_LT(geodesic_angle(e.orientation, Quat::Identity()), 1e-12);
}

TEST(Compose, MatchesHomogeneousProduct) {
  const Pose a = translation(1, 0, 0);
  const Pose b = make_pose(Vec3(1, 0, 0), rot_z(kPi / 2));
  // b = rotZ(90°)·translate(1,0,0), i.e. the rotation applied after the shift.
  const Pose b_rt = compose_poses(make_pose(Vec3::Zero(), rot_z(kPi / 2)), translation(1, 0, 0));
  const Eigen::Matrix4d m = homog_rz(0, Vec3(1, 0, 0)) * homog_rz(kPi / 2, Vec3::Zero()) * homog_rz(0, Vec3(1, 0, 0));
  const Pose c = compose_poses(a, b_rt);
  EXPECT_NEAR(c.position.x(), m(0, 3), 1e-12);
  EXPECT_NEAR(c.position.y(), m(1, 3), 1e-12);
  EXPECT_NEAR(c.position.x(), 1.0, 1e-12);
  EXPECT_NEAR(c.position.y(), 1.0, 1e-12);
  EXPECT_NEAR(compose_poses(a, b).position.x(), 2.0, 1e-12);
}

TEST(Compose, Associative) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const Pose a = random_pose(rng), b = random_pose(rng), c = random_pose(rng);
    const Pose l = compose_poses(compose_poses(a, b), c);
    const Pose r = compose_poses(a, compose_poses(b, c));
    EXPECT_LT((l.position - r.position).norm(), 1e-12);
    EXPECT_LT(geodesic_angle(l.orientation, r.orientation), 1e-9);
  }
}

TEST(RelativePose, Basics) {
  const Pose p = make_pose(Vec3(0.3, 0.1, -0.2), rot_x(0.3));
  const Pose self = relative_pose(p, p);
  EXPECT_LT(self.position.norm(), 1e-15);
  EXPECT_LT(geodesic_angle(self.orientation, Quat::Identity()), 1e-12);
  const Pose w = relative_pose(Pose::identity(), p);
  EXPECT_LT((w.position - p.position).norm(), 1e-15);
  const Pose r = relative_pose(translation(1, 0, 0), translation(1, 1, 0));
  EXPECT_NEAR(r.position.x(), 0.0, 1e-15);
  EXPECT_NEAR(r.position.y(), 1.0, 1e-15);
  EXPECT_NEAR(r.position.z(), 0.0, 1e-15);
}

TEST(RelativePose, RecoversDelta) {
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    const Pose a = random_pose(rng), d = random_pose(rng);
    const Pose r = relative_pose(a, compose_poses(a, d));
    EXPECT_LT((r.position - d.position).norm(), 1e-9);
    EXPECT_LT(geodesic_angle(r.orientation, d.orientation), 1e-9);
  }
}

TEST(Geodesic, SelfAndDoubleCover) {
  const Quat q = axis_angle(Vec3(0.2, -1, 0.5), 2.0);
  EXPECT_EQ(geodesic_angle(q, q), 0.0);
  Quat neg;
  neg.coeffs() = -q.coeffs();
  EXPECT_LT(geodesic_angle(q, neg), 1e-15);
}

TEST(Geodesic, QuarterTurn) {
  EXPECT_NEAR(geodesic_angle(Quat::Identity(), rot_z(kPi / 2)), kPi / 2, 1e-12);
}

TEST(Geodesic, SymmetricAndBounded) {
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    const Quat a = random_pose(rng).orientation, b = random_pose(rng).orientation;
    const double ab = geodesic_angle(a, b);
    EXPECT_NEAR(ab, geodesic_angle(b, a), 1e-12);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, kPi + 1e-12);
    // Oracle: acos of the trace of R_a^T R_b.
    const double tr = (to_matrix(a).transpose() * to_matrix(b)).trace();
    EXPECT_NEAR(ab, std::acos(std::clamp((tr - 1) / 2, -1.0, 1.0)), 1e-6);
  }
}

TEST(Average, IdenticalAndSignFlipped) {
  const Quat q = axis_angle(Vec3(1, 1, 0), 0.7);
  EXPECT_LT(geodesic_angle(average_quaternions({q, q}), q), 1e-12);
  Quat neg;
  neg.coeffs() = -q.coeffs();
  EXPECT_LT(geodesic_angle(average_quaternions({q, neg}), q), 1e-12);
}

TEST(Average, SmallAngleOracle) {
  const Quat m = average_quaternions({rot_z(deg2rad(10)), rot_z(deg2rad(20))});
  EXPECT_LT(geodesic_angle(m, rot_z(deg2rad(15))), 1e-3);
}

TEST(Average, EmptyThrows) {
  try {
    average_quaternions(std::vector<Quat>{});
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "no estimates");
  }
}

TEST(Average, PermutationAndSignInvariant) {
  Rng rng(17);
  const Quat base = axis_angle(Vec3(0.3, 0.1, 1), 1.2);
  std::vector<Quat> qs;
  for (int i = 0; i < 6; ++i) qs.push_back(normalized(base * from_rotation_vector(0.05 * rng.unit_vector())));
  const Quat ref = average_quaternions(qs);
  std::vector<Quat> shuffled(qs.rbegin(), qs.rend());
  for (std::size_t i = 0; i < shuffled.size(); i += 2) shuffled[i].coeffs() = -shuffled[i].coeffs();
  EXPECT_LT(geodesic_angle(average_quaternions(shuffled), ref), 1e-12);
}

TEST(Matrix, RoundTrip) {
  Rng rng(23);
  for (int i = 0; i < 500; ++i) {
    const Quat q = random_pose(rng).orientation;
    const Mat3 m = to_matrix(q);
    EXPECT_LT((m.transpose() * m - Mat3::Identity()).norm(), 1e-6);
    EXPECT_NEAR(m.determinant(), 1.0, 1e-6);
    EXPECT_LT(geodesic_angle(from_matrix(m), q), 1e-9);
  }
}

TEST(Quaternion, UnitAfterEveryOp) {
  Rng rng(29);
  for (int i = 0; i < 200; ++i) {
    const Pose a = random_pose(rng), b = random_pose(rng);
    EXPECT_NEAR(compose_poses(a, b).orientation.norm(), 1.0, 1e-9);
    EXPECT_NEAR(relative_pose(a, b).orientation.norm(), 1.0, 1e-9);
    EXPECT_NEAR(inverse(a).orientation.norm(), 1.0, 1e-9);
  }
}

TEST(RotationVector, RoundTrip) {
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    const Vec3 r = rng.unit_vector() * rng.uniform(0, kPi - 1e-6);
    EXPECT_LT((rotation_vector(from_rotation_vector(r)) - r).norm(), 1e-9);
  }
}

TEST(Twist, AboutAxis) {
  EXPECT_NEAR(twist_angle(rot_z(0.3), Vec3::UnitZ()), 0.3, 1e-12);
  EXPECT_NEAR(twist_angle(rot_z(-0.3), Vec3::UnitZ()), -0.3, 1e-12);
  EXPECT_NEAR(twist_angle(rot_x(0.3), Vec3::UnitZ()), 0.0, 1e-12);
  // A swing around x followed by a twist around z keeps the twist.
  EXPECT_NEAR(twist_angle(rot_z(0.4) * rot_x(0.2), Vec3::UnitZ()), 0.4, 2e-2);
}

TEST(Rng, StreamsAreReproducible) {
  Rng a = Rng::stream(7, 1), b = Rng::stream(7, 1), c = Rng::stream(7, 2);
  for (int i = 0; i < 10; ++i) {
    const double x = a.normal();
    EXPECT_EQ(x, b.normal());
    (void)c;
  }
  EXPECT_TRUE(a == b);
  EXPECT_NE(Rng::stream(7, 1).next_u64(), Rng::stream(7, 2).next_u64());
}

TEST(Rng, NormalMoments) {
  Rng rng(101);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s += x;
    s2 += x * x;
  }
  const double mean = s / n, var = s2 / n - mean * mean;
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(var, 1.0, 0.01);
}
