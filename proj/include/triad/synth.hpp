#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "triad/errors.hpp"
#include "triad/geometry.hpp"
#include "triad/image.hpp"
#include "triad/parallel.hpp"
#include "triad/rasterio.hpp"
#include "triad/trajectory.hpp"

namespace triad {

/// splitmix64 finalizer; derives independent stream seeds from a base seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct GaussianBump {
  double cx = 0.0;         // pixels
  double cy = 0.0;         // pixels
  double sigma = 1.0;      // pixels
  double amplitude = 0.0;  // meters, signed
};

struct SceneParams {
  int width = 320;
  int height = 240;
  double base_depth = 2.0;
  double tilt = 1.5;  // depth change from the top row to the bottom row
  int bumps = 6;
  double max_amplitude = 0.4;
  // Bump widths are drawn from [min, max] times the shorter image side.
  double sigma_min_fraction = 0.08;
  double sigma_max_fraction = 0.25;
  int texture_waves = 24;
  double texture_min_frequency = 0.01;  // cycles per pixel
  double texture_max_frequency = 0.06;
  std::uint64_t seed = 1;
};

/// Keyframe-centric ground truth: depth is a tilted base plane plus Gaussian bumps,
/// intensity is a band-limited random texture.
class SyntheticScene {
 public:
  static SyntheticScene generate(const SceneParams& params) {
    if (params.width <= 0 || params.height <= 0) throw InputError("scene: bad image size");
    if (!(params.base_depth > 0.0)) throw InputError("scene: base depth must be positive");
    if (!(std::abs(params.tilt) < params.base_depth)) throw InputError("scene: |tilt| must stay below the base depth");
    if (params.bumps < 0 || params.texture_waves < 1) throw InputError("scene: bad counts");

    SyntheticScene scene;
    scene.params_ = params;
    std::mt19937_64 rng(mix_seed(params.seed, 0));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double side = std::min(params.width, params.height);
    double total_amplitude = 0.0;
    for (int g = 0; g < params.bumps; ++g) {
      GaussianBump b;
      b.cx = unit(rng) * (params.width - 1);
      b.cy = unit(rng) * (params.height - 1);
      b.sigma = side * (params.sigma_min_fraction +
                        unit(rng) * (params.sigma_max_fraction - params.sigma_min_fraction));
      b.amplitude = (2.0 * unit(rng) - 1.0) * params.max_amplitude;
      total_amplitude += std::abs(b.amplitude);
      scene.bumps_.push_back(b);
    }
    // Keep the surface at least half the nearest plane depth away from the camera.
    const double near_plane = params.base_depth - 0.5 * std::abs(params.tilt);
    const double limit = 0.5 * near_plane;
    if (total_amplitude > limit) {
      for (auto& b : scene.bumps_) b.amplitude *= limit / total_amplitude;
      total_amplitude = limit;
    }
    scene.min_depth_ = near_plane - total_amplitude;
    scene.max_depth_ = params.base_depth + 0.5 * std::abs(params.tilt) + total_amplitude;
    scene.texture_ = make_texture(params, rng);
    return scene;
  }

  const SceneParams& params() const { return params_; }
  const std::vector<GaussianBump>& bumps() const { return bumps_; }
  int width() const { return params_.width; }
  int height() const { return params_.height; }
  std::uint64_t seed() const { return params_.seed; }

  // Lower and upper bounds on depth() over the whole plane.
  double min_depth() const { return min_depth_; }
  double max_depth() const { return max_depth_; }

  double depth(double x, double y) const {
    double d = params_.base_depth;
    if (params_.height > 1) d += params_.tilt * (y / (params_.height - 1) - 0.5);
    for (const auto& b : bumps_) {
      const double dx = x - b.cx;
      const double dy = y - b.cy;
      d += b.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * b.sigma * b.sigma));
    }
    return d;
  }

  Raster<1> depth_map() const {
    Raster<1> out(params_.width, params_.height);
    for (int y = 0; y < params_.height; ++y) {
      for (int x = 0; x < params_.width; ++x) out(x, y) = static_cast<float>(depth(x, y));
    }
    return out;
  }

  Field depth_field() const {
    Field out(params_.width, params_.height);
    for (int y = 0; y < params_.height; ++y) {
      for (int x = 0; x < params_.width; ++x) out(x, y) = depth(x, y);
    }
    return out;
  }

  // Quantized to 16 bits so it survives a PGM round trip unchanged.
  const Raster<1>& texture() const { return texture_; }

 private:
  static Raster<1> make_texture(const SceneParams& p, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    struct Wave {
      double kx, ky, phase;
    };
    std::vector<Wave> waves;
    for (int j = 0; j < p.texture_waves; ++j) {
      const double f = p.texture_min_frequency +
                       unit(rng) * (p.texture_max_frequency - p.texture_min_frequency);
      const double theta = 2.0 * std::numbers::pi * unit(rng);
      waves.push_back({2.0 * std::numbers::pi * f * std::cos(theta),
                       2.0 * std::numbers::pi * f * std::sin(theta),
                       2.0 * std::numbers::pi * unit(rng)});
    }
    Field raw(p.width, p.height);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int y = 0; y < p.height; ++y) {
      for (int x = 0; x < p.width; ++x) {
        double v = 0.0;
        for (const auto& w : waves) v += std::cos(w.kx * x + w.ky * y + w.phase);
        raw(x, y) = v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    const double span = hi > lo ? hi - lo : 1.0;
    Raster<1> out(p.width, p.height);
    for (std::size_t i = 0; i < out.pixel_count(); ++i) {
      const double q = std::round((raw.at(i) - lo) / span * 65535.0) / 65535.0;
      out.at(i) = static_cast<float>(q);
    }
    return out;
  }

  SceneParams params_;
  std::vector<GaussianBump> bumps_;
  Raster<1> texture_;
  double min_depth_ = 0.0;
  double max_depth_ = 0.0;
};

/// Points closer than this to frame k's image plane are treated as behind it.
inline constexpr double kMinProjectionDepth = 1e-6;
// Pixels, absorbs rounding when a point projects onto the image border.
inline constexpr double kProjectionBoundsSlack = 1e-6;

/// Where keyframe pixel (x, y) with the given depth lands in frame k, or
/// nothing when it falls behind the camera or outside the image.
inline std::optional<Vec2> project_pixel(double x, double y, double depth, const Intrinsics& K,
                                         const RelativePose& keyframe_to_k) {
  const Vec3 point = keyframe_to_k.apply(K.normalize(x, y) * depth);
  if (!(point.z() > kMinProjectionDepth)) return std::nullopt;
  const Vec2 uv = K.project(point);
  const double lo = -kProjectionBoundsSlack;
  if (!(uv.x() >= lo && uv.y() >= lo && uv.x() <= K.width - 1.0 + kProjectionBoundsSlack &&
        uv.y() <= K.height - 1.0 + kProjectionBoundsSlack)) {
    return std::nullopt;
  }
  return uv;
}

/// Exact flow from the keyframe into frame k under the scene's ground truth.
inline FlowField render_flow(const SyntheticScene& scene, const Intrinsics& K,
                             const RelativePose& keyframe_to_k, int workers = 1) {
  if (scene.width() != K.width || scene.height() != K.height) {
    throw InputError("render_flow: scene and intrinsics disagree on image size");
  }
  if (!keyframe_to_k.rotation.allFinite() || !keyframe_to_k.translation.allFinite()) {
    throw InputError("render_flow: non-finite pose");
  }
  FlowField flow(K.width, K.height);
  parallel_rows(K.height, workers, [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < K.width; ++x) {
        const auto uv = project_pixel(x, y, scene.depth(x, y), K, keyframe_to_k);
        if (!uv) {
          flow.invalidate(x, y);
          continue;
        }
        flow.flow(x, y, 0) = static_cast<float>(uv->x() - x);
        flow.flow(x, y, 1) = static_cast<float>(uv->y() - y);
      }
    }
  });
  return flow;
}

struct NoiseModel {
  double sigma_flow = 0.0;    // pixels, per component
  double outlier_rate = 0.0;  // Bernoulli probability per valid pixel
  double outlier_span = 20.0; // outliers are uniform in [-span, span] pixels
  std::uint64_t seed = 0;

  void validate() const {
    if (!(sigma_flow >= 0.0)) throw InputError("noise: sigma_flow must be non-negative");
    if (!(outlier_rate >= 0.0 && outlier_rate <= 1.0)) throw InputError("noise: outlier_rate not in [0, 1]");
    if (!(outlier_span >= 0.0)) throw InputError("noise: outlier_span must be non-negative");
  }
};

/// Gaussian noise plus uniform outliers on valid pixels; invalid pixels are
/// left as they are. Draws happen in row-major order from a single stream.
inline FlowField corrupt_flow(const FlowField& flow, const NoiseModel& model) {
  model.validate();
  FlowField out = flow;
  if (model.sigma_flow == 0.0 && model.outlier_rate == 0.0) return out;
  std::mt19937_64 rng(mix_seed(model.seed, 1));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int y = 0; y < flow.height(); ++y) {
    for (int x = 0; x < flow.width(); ++x) {
      if (!flow.is_valid(x, y)) continue;
      const bool outlier = unit(rng) < model.outlier_rate;
      if (outlier) {
        out.flow(x, y, 0) = static_cast<float>((2.0 * unit(rng) - 1.0) * model.outlier_span);
        out.flow(x, y, 1) = static_cast<float>((2.0 * unit(rng) - 1.0) * model.outlier_span);
      } else if (model.sigma_flow > 0.0) {
        out.flow(x, y, 0) = static_cast<float>(flow.flow(x, y, 0) + model.sigma_flow * gauss(rng));
        out.flow(x, y, 1) = static_cast<float>(flow.flow(x, y, 1) + model.sigma_flow * gauss(rng));
      }
    }
  }
  return out;
}

enum class TrajectoryKind { kConstantVelocity, kStopAndGo, kOrbit };

inline TrajectoryKind parse_trajectory_kind(const std::string& s) {
  if (s == "constant-velocity") return TrajectoryKind::kConstantVelocity;
  if (s == "stop-and-go") return TrajectoryKind::kStopAndGo;
  if (s == "orbit") return TrajectoryKind::kOrbit;
  throw ConfigError("unknown trajectory kind '" + s + "'");
}

inline std::string to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::kConstantVelocity: return "constant-velocity";
    case TrajectoryKind::kStopAndGo: return "stop-and-go";
    case TrajectoryKind::kOrbit: return "orbit";
  }
  return "?";
}

struct TrajectoryParams {
  int frames = 30;
  double frame_interval = 1.0 / 30.0;  // seconds
  Vec3 velocity = Vec3(0.04, 0.0, 0.0);  // meters per frame
  Vec3 angular_velocity = Vec3::Zero();  // axis * radians per frame
  // stop-and-go: after each run of `move_frames` moving frames the camera holds
  // still for `dwell_frames` frames.
  int move_frames = 3;
  int dwell_frames = 7;
  // orbit: camera circles a point `orbit_radius` ahead of its start, looking at it.
  double orbit_radius = 2.0;
  int orbit_steps = 36;
};

/// Analytic world-from-camera trajectories. Frame 0 sits at the origin with
/// identity orientation.
inline Trajectory make_trajectory(TrajectoryKind kind, const TrajectoryParams& p) {
  if (p.frames < 1) throw InputError("trajectory: need at least one frame");
  if (!(p.frame_interval > 0.0)) throw InputError("trajectory: frame interval must be positive");
  Trajectory traj;
  const double omega = p.angular_velocity.norm();
  const Vec3 axis = omega > 0.0 ? Vec3(p.angular_velocity / omega) : Vec3::UnitZ();
  int moved = 0;
  for (int i = 0; i < p.frames; ++i) {
    RelativePose pose;
    switch (kind) {
      case TrajectoryKind::kConstantVelocity:
        pose.translation = static_cast<double>(i) * p.velocity;
        pose.rotation = axis_angle(axis, i * omega);
        break;
      case TrajectoryKind::kStopAndGo: {
        if (p.move_frames < 1 || p.dwell_frames < 0) throw InputError("trajectory: bad stop-and-go pattern");
        if (i > 0 && (i - 1) % (p.move_frames + p.dwell_frames) < p.move_frames) ++moved;
        pose.translation = static_cast<double>(moved) * p.velocity;
        pose.rotation = axis_angle(axis, moved * omega);
        break;
      }
      case TrajectoryKind::kOrbit: {
        if (p.orbit_steps < 1 || !(p.orbit_radius > 0.0)) throw InputError("trajectory: bad orbit");
        const double theta = 2.0 * std::numbers::pi * i / p.orbit_steps;
        pose.rotation = axis_angle(Vec3::UnitY(), theta);
        const Vec3 center(0.0, 0.0, p.orbit_radius);
        pose.translation = center + pose.rotation * Vec3(0.0, 0.0, -p.orbit_radius);
        break;
      }
    }
    traj.push_back({i * p.frame_interval, pose});
  }
  return traj;
}

}  // namespace triad
