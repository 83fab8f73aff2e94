#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "triad/geometry.hpp"
#include "triad/trajectory.hpp"

using namespace triad;

namespace {

RelativePose random_pose(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return RelativePose::from_quaternion(q, Vec3(n(rng), n(rng), n(rng)));
}

Intrinsics vga() { return {500.0, 480.0, 319.5, 239.5, 640, 480}; }

}  // namespace

TEST(Intrinsics, NormalizesPrincipalPointToOpticalAxis) {
  const Vec3 m = pixel_to_normalized(Vec2(319.5, 239.5), vga());
  EXPECT_DOUBLE_EQ(m.x(), 0.0);
  EXPECT_DOUBLE_EQ(m.y(), 0.0);
  EXPECT_DOUBLE_EQ(m.z(), 1.0);
}

TEST(Intrinsics, NormalizeThenProjectRoundTrips) {
  const Intrinsics K = vga();
  const Vec3 m = pixel_to_normalized(Vec2(12.25, 401.0), K);
  const Vec2 back = K.project(m * 3.7);
  EXPECT_NEAR(back.x(), 12.25, 1e-12);
  EXPECT_NEAR(back.y(), 401.0, 1e-12);
}

TEST(Intrinsics, OutOfBoundsPixelThrows) {
  const Intrinsics K = vga();
  EXPECT_THROW(pixel_to_normalized(Vec2(-0.5, 10.0), K), BoundsError);
  EXPECT_THROW(pixel_to_normalized(Vec2(10.0, 479.5), K), BoundsError);
  EXPECT_NO_THROW(pixel_to_normalized(Vec2(639.0, 479.0), K));
}

TEST(Intrinsics, ValidateRejectsBadValues) {
  Intrinsics K = vga();
  K.fx = 0.0;
  EXPECT_THROW(K.validate(), InputError);
  K = vga();
  K.cx = 700.0;
  EXPECT_THROW(K.validate(), InputError);
}

TEST(Pose, ComposeMatchesMatrixProduct) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    const RelativePose a = random_pose(rng), b = random_pose(rng);
    const Eigen::Matrix4d expected = oracle::homogeneous(b) * oracle::homogeneous(a);
    EXPECT_LE((compose(a, b).matrix() - expected).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Pose, InverseComposesToIdentity) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 50; ++i) {
    const RelativePose a = random_pose(rng);
    const Eigen::Matrix4d m = compose(a, inverse(a)).matrix();
    EXPECT_LE((m - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_TRUE(compose(a, inverse(a)).is_valid());
  }
}

TEST(Pose, ComposeIsAssociative) {
  std::mt19937_64 rng(9);
  const RelativePose a = random_pose(rng), b = random_pose(rng), c = random_pose(rng);
  const auto l = compose(compose(a, b), c).matrix();
  const auto r = compose(a, compose(b, c)).matrix();
  EXPECT_LE((l - r).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Pose, RejectsNonOrthonormalRotation) {
  RelativePose p;
  p.rotation(0, 1) = 0.1;
  EXPECT_FALSE(p.is_valid());
  EXPECT_THROW(p.validate(), InputError);
  p.rotation = -Mat3::Identity();
  EXPECT_FALSE(p.is_valid());
}

TEST(Pose, RelativeAngleMatchesQuaternionOracle) {
  std::mt19937_64 rng(10);
  for (int i = 0; i < 200; ++i) {
    const RelativePose a = random_pose(rng), b = random_pose(rng);
    const auto m = relative_angle_translation(a, b);
    EXPECT_NEAR(m.angle, oracle::quaternion_angle(a.rotation, b.rotation), 1e-9);
  }
}

TEST(Pose, RelativeDistanceIsCameraCentreSeparation) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const RelativePose wa = random_pose(rng), wb = random_pose(rng);
    const auto m = relative_angle_translation(wa.inverse(), wb.inverse());
    EXPECT_NEAR(m.distance, (wa.translation - wb.translation).norm(), 1e-12);
  }
}

TEST(Pose, SmallAnglesKeepPrecision) {
  const Mat3 r = axis_angle(Vec3(0.3, -1.0, 0.2), 1e-7);
  EXPECT_NEAR(rotation_angle(r), 1e-7, 1e-15);
  EXPECT_NEAR(rotation_angle(axis_angle(Vec3::UnitX(), 3.14159)), 3.14159, 1e-12);
}

TEST(Ray, IsUnitLengthAndRejectsZero) {
  const Ray r(Vec3(3.0, 4.0, 12.0));
  EXPECT_NEAR(r.direction().norm(), 1.0, 1e-15);
  EXPECT_THROW(Ray(Vec3::Zero()), InputError);
  EXPECT_THROW(Ray(Vec3(std::nan(""), 0.0, 1.0)), InputError);
}

TEST(Trajectory, KeyframeToFrameMapsKeyframePointsIntoFrame) {
  std::mt19937_64 rng(12);
  Trajectory traj;
  for (int i = 0; i < 4; ++i) traj.push_back({i * 0.1, random_pose(rng)});
  const Vec3 x_kf(0.2, -0.1, 2.0);
  const Vec3 world = traj.pose(1).apply(x_kf);
  const Vec3 x_3 = traj.pose(3).inverse().apply(world);
  EXPECT_LE((traj.keyframe_to_frame(1, 3).apply(x_kf) - x_3).norm(), 1e-12);
}

TEST(Trajectory, RejectsNonIncreasingTimestamps) {
  Trajectory traj;
  traj.push_back({1.0, RelativePose::identity()});
  EXPECT_THROW(traj.push_back({1.0, RelativePose::identity()}), InputError);
}
