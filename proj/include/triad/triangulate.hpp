#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "triad/errors.hpp"
#include "triad/geometry.hpp"
#include "triad/image.hpp"
#include "triad/parallel.hpp"
#include "triad/rasterio.hpp"

namespace triad {

struct TriangulationOptions {
  double hessian_epsilon = 1e-12;
  double max_depth = 100.0;  // meters
  int workers = 1;
};

/// One correspondence of a keyframe pixel: the unit ray of the matched pixel in
/// frame k and the keyframe-to-frame-k pose.
struct Observation {
  Ray ray;
  RelativePose pose;
};

struct PixelDepth {
  double depth = 0.0;     // meters along +z of the keyframe
  double hessian = 0.0;   // sum of |a_k|^2
  double residual = 0.0;  // sqrt of the cost at the minimizer
};

/// Scalar least-squares triangulation of one keyframe pixel.
///
/// `ray` is the keyframe pixel in normalized coordinates [x' y' 1], so the
/// unknown is depth, not range. Each observation contributes
/// |s_k x (R_k ray d + p_k)|^2 = |a_k d + b_k|^2. Returns nothing when the
/// problem is degenerate: too little curvature, non-positive depth, or depth
/// beyond the configured limit.
inline std::optional<PixelDepth> triangulate_pixel(const Vec3& ray, std::span<const Observation> obs,
                                                   const TriangulationOptions& opts = {}) {
  double h = 0.0;
  double beta = 0.0;
  for (const auto& o : obs) {
    const Vec3 a = o.ray.direction().cross(o.pose.rotation * ray);
    const Vec3 b = o.ray.direction().cross(o.pose.translation);
    h += a.squaredNorm();
    beta += a.dot(b);
  }
  if (!(h >= opts.hessian_epsilon)) return std::nullopt;
  const double depth = -beta / h;
  if (!(depth > 0.0 && depth <= opts.max_depth)) return std::nullopt;
  double cost = 0.0;
  for (const auto& o : obs) {
    const Vec3 r = o.ray.direction().cross(o.pose.rotation * ray * depth + o.pose.translation);
    cost += r.squaredNorm();
  }
  return PixelDepth{depth, h, std::sqrt(std::max(0.0, cost))};
}

/// Cost of the scalar problem at an arbitrary depth; handy for diagnostics.
inline double triangulation_cost(const Vec3& ray, std::span<const Observation> obs, double depth) {
  double cost = 0.0;
  for (const auto& o : obs) {
    cost += o.ray.direction().cross(o.pose.rotation * ray * depth + o.pose.translation).squaredNorm();
  }
  return cost;
}

struct FlowObservation {
  FlowField flow;
  RelativePose keyframe_to_frame;
};

struct TriangulationInput {
  Intrinsics intrinsics;
  std::vector<FlowObservation> frames;
};

/// Triangulated keyframe depth with its two confidence channels. Invalid
/// pixels are NaN in every channel.
struct InitialDepth {
  Raster<1> depth;
  Raster<1> conf_h;  // sqrt of the Hessian
  Raster<1> conf_r;  // residual norm
  Mask valid;

  int width() const { return depth.width(); }
  int height() const { return depth.height(); }
  std::size_t valid_count() const {
    std::size_t n = 0;
    for (auto v : valid.data()) n += v != 0;
    return n;
  }

  /// Rebuilds the validity mask from the depth channel (finite and positive).
  static InitialDepth from_rasters(Raster<1> depth, Raster<1> conf_h, Raster<1> conf_r) {
    require_same_size(depth, conf_h, "initial depth");
    require_same_size(depth, conf_r, "initial depth");
    InitialDepth out{std::move(depth), std::move(conf_h), std::move(conf_r), Mask()};
    out.valid = Mask(out.depth.width(), out.depth.height(), 0);
    for (std::size_t i = 0; i < out.depth.pixel_count(); ++i) {
      const bool ok = std::isfinite(out.depth.at(i)) && out.depth.at(i) > 0.0f &&
                      std::isfinite(out.conf_h.at(i)) && std::isfinite(out.conf_r.at(i));
      out.valid.at(i) = ok ? 1 : 0;
      if (!ok) {
        out.depth.at(i) = out.conf_h.at(i) = out.conf_r.at(i) = std::numeric_limits<float>::quiet_NaN();
      }
    }
    return out;
  }
};

/// Dense triangulation over every keyframe pixel. Observations whose flow is
/// invalid are dropped for that pixel only.
inline InitialDepth triangulate_map(const TriangulationInput& input,
                                    const TriangulationOptions& opts = {}) {
  const Intrinsics& K = input.intrinsics;
  K.validate();
  if (input.frames.empty()) throw InputError("triangulate: need at least one adjacent frame");
  for (const auto& f : input.frames) {
    if (f.flow.width() != K.width || f.flow.height() != K.height) {
      throw InputError("triangulate: flow field size does not match the intrinsics");
    }
    f.keyframe_to_frame.validate();
  }
  constexpr float nan = std::numeric_limits<float>::quiet_NaN();
  InitialDepth out{Raster<1>(K.width, K.height, nan), Raster<1>(K.width, K.height, nan),
                   Raster<1>(K.width, K.height, nan), Mask(K.width, K.height, 0)};
  parallel_rows(K.height, opts.workers, [&](int y0, int y1) {
    std::vector<Observation> obs;
    obs.reserve(input.frames.size());
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < K.width; ++x) {
        obs.clear();
        for (const auto& f : input.frames) {
          if (!f.flow.is_valid(x, y)) continue;
          const Vec3 target = K.normalize(x + static_cast<double>(f.flow.flow(x, y, 0)),
                                          y + static_cast<double>(f.flow.flow(x, y, 1)));
          obs.push_back({Ray(target), f.keyframe_to_frame});
        }
        if (obs.empty()) continue;
        const auto sol = triangulate_pixel(K.normalize(x, y), obs, opts);
        if (!sol) continue;
        out.depth(x, y) = static_cast<float>(sol->depth);
        out.conf_h(x, y) = static_cast<float>(std::sqrt(sol->hessian));
        out.conf_r(x, y) = static_cast<float>(sol->residual);
        out.valid(x, y) = 1;
      }
    }
  });
  return out;
}

struct EpipolarLoss {
  double total = 0.0;
  Raster<1> per_pixel;  // NaN where the flow or ground truth is unusable
};

/// Two-view triangulation cost evaluated at the ground-truth depth, summed over
/// pixels with valid flow and finite ground truth in row-major order.
inline EpipolarLoss epipolar_loss(const FlowField& flow, const RelativePose& keyframe_to_frame,
                                  const Raster<1>& gt_depth, const Intrinsics& K) {
  require_same_size(flow.flow, gt_depth, "epipolar_loss");
  if (flow.width() != K.width || flow.height() != K.height) {
    throw InputError("epipolar_loss: flow size does not match the intrinsics");
  }
  EpipolarLoss out{0.0, Raster<1>(K.width, K.height, std::numeric_limits<float>::quiet_NaN())};
  double total = 0.0;
  for (int y = 0; y < K.height; ++y) {
    for (int x = 0; x < K.width; ++x) {
      const double d = gt_depth(x, y);
      if (!flow.is_valid(x, y) || !std::isfinite(d)) continue;
      const Ray s(K.normalize(x + static_cast<double>(flow.flow(x, y, 0)),
                              y + static_cast<double>(flow.flow(x, y, 1))));
      const Vec3 point = keyframe_to_frame.rotation * K.normalize(x, y) * d + keyframe_to_frame.translation;
      const double l = s.direction().cross(point).squaredNorm();
      out.per_pixel(x, y) = static_cast<float>(l);
      total += l;
    }
  }
  out.total = total;
  return out;
}

}  // namespace triad
