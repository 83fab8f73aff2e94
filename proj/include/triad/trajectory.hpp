#pragma once

#include <cstddef>
#include <vector>

#include "triad/errors.hpp"
#include "triad/geometry.hpp"

namespace triad {

struct StampedPose {
  double timestamp = 0.0;  // seconds
  RelativePose pose;       // world-from-camera
};

/// Camera poses expressed in a fixed world frame, ordered by strictly
/// increasing timestamp.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<StampedPose> poses) : poses_(std::move(poses)) { validate(); }

  void push_back(const StampedPose& p) {
    if (!poses_.empty() && !(p.timestamp > poses_.back().timestamp)) {
      throw InputError("trajectory: timestamps must be strictly increasing");
    }
    poses_.push_back(p);
  }

  std::size_t size() const { return poses_.size(); }
  bool empty() const { return poses_.empty(); }
  const StampedPose& operator[](std::size_t i) const { return poses_[i]; }
  const RelativePose& pose(std::size_t i) const { return poses_[i].pose; }
  auto begin() const { return poses_.begin(); }
  auto end() const { return poses_.end(); }

  /// Pose taking keyframe camera coordinates into frame `k`'s camera coordinates.
  RelativePose keyframe_to_frame(std::size_t keyframe, std::size_t k) const {
    return compose(poses_.at(keyframe).pose, poses_.at(k).pose.inverse());
  }

  /// Camera-from-world pose of frame `i`.
  RelativePose camera_from_world(std::size_t i) const { return poses_.at(i).pose.inverse(); }

 private:
  void validate() const {
    for (std::size_t i = 1; i < poses_.size(); ++i) {
      if (!(poses_[i].timestamp > poses_[i - 1].timestamp)) {
        throw InputError("trajectory: timestamps must be strictly increasing");
      }
    }
  }

  std::vector<StampedPose> poses_;
};

}  // namespace triad
