#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "triad/errors.hpp"

namespace triad {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Pinhole intrinsics in pixels. Pixel centers sit on integer coordinates, so
/// the image covers [0, width-1] x [0, height-1].
struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.5;
  double cy = 0.5;
  int width = 1;
  int height = 1;

  void validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw InputError("intrinsics: focal lengths must be positive");
    if (width <= 0 || height <= 0) throw InputError("intrinsics: image size must be positive");
    if (!(cx > 0.0 && cx < width) || !(cy > 0.0 && cy < height)) {
      throw InputError("intrinsics: principal point outside the image");
    }
  }

  bool contains(double x, double y) const {
    return x >= 0.0 && y >= 0.0 && x <= width - 1.0 && y <= height - 1.0;
  }

  // Same as pixel_to_normalized() without the bounds check; correspondences
  // perturbed by flow noise may legitimately land just outside the frame.
  Vec3 normalize(double x, double y) const { return Vec3((x - cx) / fx, (y - cy) / fy, 1.0); }

  Vec2 project(const Vec3& point) const {
    return Vec2(fx * point.x() / point.z() + cx, fy * point.y() / point.z() + cy);
  }

  bool operator==(const Intrinsics&) const = default;
};

/// Maps homogeneous pixel coordinates to normalized camera coordinates [x' y' 1].
inline Vec3 pixel_to_normalized(const Vec2& pixel, const Intrinsics& K) {
  if (!K.contains(pixel.x(), pixel.y())) {
    throw BoundsError("pixel (" + std::to_string(pixel.x()) + ", " + std::to_string(pixel.y()) +
                      ") outside " + std::to_string(K.width) + "x" + std::to_string(K.height) +
                      " image");
  }
  return K.normalize(pixel.x(), pixel.y());
}

/// Rigid transform x' = rotation * x + translation.
///
/// For keyframe-relative poses this maps keyframe camera coordinates into frame
/// k's camera coordinates; in a Trajectory it maps camera coordinates into the
/// world frame.
struct RelativePose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RelativePose identity() { return {}; }

  static RelativePose from_quaternion(const Eigen::Quaterniond& q, const Vec3& t) {
    return {q.normalized().toRotationMatrix(), t};
  }

  Vec3 apply(const Vec3& x) const { return rotation * x + translation; }

  RelativePose inverse() const {
    const Mat3 rt = rotation.transpose();
    return {rt, -rt * translation};
  }

  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
  }

  bool is_valid(double tolerance = 1e-9) const {
    if (!rotation.allFinite() || !translation.allFinite()) return false;
    const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
    return ortho <= tolerance && std::abs(rotation.determinant() - 1.0) <= tolerance;
  }

  void validate(double tolerance = 1e-9) const {
    if (!is_valid(tolerance)) throw InputError("pose: rotation is not a proper orthonormal matrix");
  }
};

/// Transform by `a` first, then by `b`.
inline RelativePose compose(const RelativePose& a, const RelativePose& b) {
  return {b.rotation * a.rotation, b.rotation * a.translation + b.translation};
}

inline RelativePose inverse(const RelativePose& pose) { return pose.inverse(); }

/// Unit-length viewing direction.
class Ray {
 public:
  explicit Ray(const Vec3& v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw InputError("ray: zero or non-finite direction");
    direction_ = v / n;
  }
  const Vec3& direction() const { return direction_; }

 private:
  Vec3 direction_;
};

/// Rotation angle of a proper rotation matrix, in [0, pi]. Uses atan2 of the
/// sine and cosine parts so small and near-pi angles keep full precision.
inline double rotation_angle(const Mat3& r) {
  const Vec3 axis(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double s = 0.5 * axis.norm();
  const double c = 0.5 * (r.trace() - 1.0);
  return std::atan2(s, c);
}

struct AngleDistance {
  double angle = 0.0;     // radians
  double distance = 0.0;  // meters
};

/// Motion between two poses of the same convention: the angle of R_a R_b^T and
/// the translation norm of a∘b⁻¹. For camera-from-world poses the distance is
/// the separation of the two camera centers.
inline AngleDistance relative_angle_translation(const RelativePose& a, const RelativePose& b) {
  const RelativePose rel = compose(b.inverse(), a);
  return {rotation_angle(rel.rotation), rel.translation.norm()};
}

inline Mat3 axis_angle(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

}  // namespace triad
