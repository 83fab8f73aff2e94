#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "triad/errors.hpp"
#include "triad/geometry.hpp"
#include "triad/trajectory.hpp"

namespace triad {

enum class SelectionMode { kFixed, kAdaptive };

// What adaptive thresholds are measured against on each side of the keyframe.
enum class SelectionAnchor { kPrevious, kKeyframe };

struct SelectionPolicy {
  SelectionMode mode = SelectionMode::kFixed;
  int n_frames = 5;  // total, keyframe included
  int fixed_step = 5;
  double theta_min = 0.05;  // radians
  double t_min = 0.05;      // meters
  SelectionAnchor anchor = SelectionAnchor::kPrevious;

  void validate() const {
    if (n_frames < 2) throw InputError("selection: n_frames must be at least 2");
    if (fixed_step < 1) throw InputError("selection: fixed_step must be at least 1");
    if (!(theta_min >= 0.0) || !(t_min >= 0.0)) throw InputError("selection: thresholds must be non-negative");
  }
};

inline SelectionMode parse_selection_mode(const std::string& s) {
  if (s == "fixed") return SelectionMode::kFixed;
  if (s == "adaptive") return SelectionMode::kAdaptive;
  throw ConfigError("unknown selection mode '" + s + "'");
}

inline SelectionAnchor parse_selection_anchor(const std::string& s) {
  if (s == "previous") return SelectionAnchor::kPrevious;
  if (s == "keyframe") return SelectionAnchor::kKeyframe;
  throw ConfigError("unknown selection anchor '" + s + "'");
}

struct Selection {
  std::vector<std::size_t> indices;  // ascending, keyframe excluded
  bool shortfall = false;            // fewer than n_frames - 1 were found
};

/// Absolute slack on threshold comparisons so that motions equal to a
/// threshold up to rounding still count as reaching it.
inline constexpr double kThresholdSlack = 1e-9;

/// True when the motion between two frames clears either threshold.
inline bool clears_thresholds(const Trajectory& traj, std::size_t a, std::size_t b,
                              const SelectionPolicy& policy) {
  const auto m = relative_angle_translation(traj.camera_from_world(a), traj.camera_from_world(b));
  return m.angle >= policy.theta_min - kThresholdSlack || m.distance >= policy.t_min - kThresholdSlack;
}

/// Picks the adjacent frames for a keyframe.
///
/// Fixed mode takes keyframe ± j·fixed_step, half before and half after (the
/// extra one goes after when the count is odd), dropping indices past either
/// end. Adaptive mode scans outward, alternating sides per accepted frame, and
/// accepts a frame once it clears a threshold relative to the anchor of its side.
inline Selection select_frames(const Trajectory& traj, std::size_t keyframe,
                               const SelectionPolicy& policy) {
  policy.validate();
  if (keyframe >= traj.size()) {
    throw InputError("selection: keyframe " + std::to_string(keyframe) + " outside a trajectory of " +
                     std::to_string(traj.size()) + " frames");
  }
  const auto wanted = static_cast<std::size_t>(policy.n_frames - 1);
  const auto last = static_cast<long>(traj.size()) - 1;
  const auto kf = static_cast<long>(keyframe);
  Selection out;

  if (policy.mode == SelectionMode::kFixed) {
    const long before = static_cast<long>(wanted / 2);
    const long after = static_cast<long>(wanted) - before;
    for (long j = before; j >= 1; --j) {
      const long idx = kf - j * policy.fixed_step;
      if (idx >= 0) out.indices.push_back(static_cast<std::size_t>(idx));
    }
    for (long j = 1; j <= after; ++j) {
      const long idx = kf + j * policy.fixed_step;
      if (idx <= last) out.indices.push_back(static_cast<std::size_t>(idx));
    }
  } else {
    struct Side {
      long cursor;
      long step;
      std::size_t anchor;
      bool exhausted = false;
    };
    Side sides[2] = {{kf - 1, -1, keyframe}, {kf + 1, +1, keyframe}};
    // Advances one side to its next accepted frame; false once it runs out.
    auto next = [&](Side& side) {
      while (side.cursor >= 0 && side.cursor <= last) {
        const auto idx = static_cast<std::size_t>(side.cursor);
        side.cursor += side.step;
        if (clears_thresholds(traj, side.anchor, idx, policy)) {
          if (policy.anchor == SelectionAnchor::kPrevious) side.anchor = idx;
          out.indices.push_back(idx);
          return true;
        }
      }
      side.exhausted = true;
      return false;
    };
    int turn = 0;
    while (out.indices.size() < wanted && !(sides[0].exhausted && sides[1].exhausted)) {
      Side& side = sides[turn];
      if (!side.exhausted) next(side);
      turn ^= 1;
    }
  }
  std::ranges::sort(out.indices);
  out.shortfall = out.indices.size() < wanted;
  return out;
}

}  // namespace triad
