#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "triad/errors.hpp"
#include "triad/image.hpp"
#include "triad/parallel.hpp"
#include "triad/triangulate.hpp"

namespace triad {

/// Which triangulation confidences feed the data weights.
enum class ConfidenceInputs {
  kFull,          // sqrt-Hessian and residual
  kHessianOnly,   // residual term replaced by tau^2 alone
  kResidualOnly,  // Hessian fixed to 1
  kDepthOnly,     // one constant weight on every valid pixel
};

inline ConfidenceInputs parse_confidence_inputs(const std::string& s) {
  if (s == "full") return ConfidenceInputs::kFull;
  if (s == "hessian") return ConfidenceInputs::kHessianOnly;
  if (s == "residual") return ConfidenceInputs::kResidualOnly;
  if (s == "depth") return ConfidenceInputs::kDepthOnly;
  throw ConfigError("unknown confidence inputs '" + s + "'");
}

inline std::string to_string(ConfidenceInputs c) {
  switch (c) {
    case ConfidenceInputs::kFull: return "full";
    case ConfidenceInputs::kHessianOnly: return "hessian";
    case ConfidenceInputs::kResidualOnly: return "residual";
    case ConfidenceInputs::kDepthOnly: return "depth";
  }
  return "?";
}

struct RefineConfig {
  int iterations = 7;
  double mu = 1.0;      // smoothness strength
  double kappa = 0.1;   // intensity-edge sensitivity of the smoothness weights
  double omega = 0.9;   // Jacobi damping
  double tau = 0.1;     // meters, residual floor in the data weights
  double w_max = 1e4;
  double sigma_min = 0.01;  // meters
  double beta = 1.0;
  double sigma_cap = 10.0;  // meters, for pixels with no curvature at all
  ConfidenceInputs confidence = ConfidenceInputs::kFull;
  int workers = 1;

  void validate() const {
    if (iterations < 0) throw InputError("refine: iterations must be non-negative");
    if (!(mu >= 0.0)) throw InputError("refine: mu must be non-negative");
    if (!(kappa > 0.0)) throw InputError("refine: kappa must be positive");
    if (!(omega > 0.0 && omega <= 1.0)) throw InputError("refine: omega must lie in (0, 1]");
    if (!(tau > 0.0)) throw InputError("refine: tau must be positive");
    if (!(w_max > 0.0)) throw InputError("refine: w_max must be positive");
    if (!(sigma_min > 0.0) || !(beta > 0.0) || !(sigma_cap > 0.0)) {
      throw InputError("refine: uncertainty parameters must be positive");
    }
  }
};

/// Data weights per pixel plus smoothness weights per 4-neighbor edge.
/// `horizontal(x, y)` joins (x, y)-(x+1, y); `vertical(x, y)` joins (x, y)-(x, y+1).
/// Storing each edge once makes the weights symmetric by construction.
struct WeightMaps {
  Field w;
  Field horizontal;
  Field vertical;

  int width() const { return w.width(); }
  int height() const { return w.height(); }

  /// Sum of edge weights around pixel (x, y), neighbors taken left, right, up, down.
  double edge_sum(int x, int y) const {
    double s = 0.0;
    if (x > 0) s += horizontal(x - 1, y);
    if (x + 1 < width()) s += horizontal(x, y);
    if (y > 0) s += vertical(x, y - 1);
    if (y + 1 < height()) s += vertical(x, y);
    return s;
  }
};

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lower + upper);
}

inline double full_weight(double conf_h, double conf_r, const RefineConfig& cfg) {
  return std::min(cfg.w_max, conf_h * conf_h / (conf_r * conf_r + cfg.tau * cfg.tau));
}

}  // namespace detail

/// Closed-form weights: w = min(w_max, H / (c_r^2 + tau^2)) with H = c_h^2 on
/// valid pixels and 0 elsewhere; edges get exp(-|I_i - I_j| / kappa).
inline WeightMaps build_weights(const InitialDepth& init, const Raster<1>& intensity,
                                const RefineConfig& cfg) {
  cfg.validate();
  require_same_size(init.depth, intensity, "build_weights");
  const int W = init.width();
  const int H = init.height();
  WeightMaps out{Field(W, H, 0.0), Field(std::max(W - 1, 0), H, 1.0), Field(W, std::max(H - 1, 0), 1.0)};

  std::vector<double> full;
  for (std::size_t i = 0; i < init.depth.pixel_count(); ++i) {
    if (!init.valid.at(i)) continue;
    const double ch = init.conf_h.at(i);
    const double cr = init.conf_r.at(i);
    double w = 0.0;
    switch (cfg.confidence) {
      case ConfidenceInputs::kFull:
      case ConfidenceInputs::kDepthOnly:
        w = detail::full_weight(ch, cr, cfg);
        break;
      case ConfidenceInputs::kHessianOnly:
        w = std::min(cfg.w_max, ch * ch / (cfg.tau * cfg.tau));
        break;
      case ConfidenceInputs::kResidualOnly:
        w = std::min(cfg.w_max, 1.0 / (cr * cr + cfg.tau * cfg.tau));
        break;
    }
    out.w.at(i) = w;
    if (cfg.confidence == ConfidenceInputs::kDepthOnly) full.push_back(w);
  }
  if (cfg.confidence == ConfidenceInputs::kDepthOnly) {
    const double constant = detail::median(std::move(full));
    for (std::size_t i = 0; i < out.w.pixel_count(); ++i) {
      if (init.valid.at(i)) out.w.at(i) = constant;
    }
  }

  for (int y = 0; y < H; ++y) {
    for (int x = 0; x + 1 < W; ++x) {
      out.horizontal(x, y) = std::exp(-std::abs(double(intensity(x, y)) - intensity(x + 1, y)) / cfg.kappa);
    }
  }
  for (int y = 0; y + 1 < H; ++y) {
    for (int x = 0; x < W; ++x) {
      out.vertical(x, y) = std::exp(-std::abs(double(intensity(x, y)) - intensity(x, y + 1)) / cfg.kappa);
    }
  }
  return out;
}

struct RefineResult {
  std::vector<Field> depths;       // iterates 0..K, meters
  Field uncertainty;               // Laplacian scale, meters
  std::vector<double> objective;   // C at each iterate
  double fill_depth = 0.0;         // start value used for invalid pixels

  const Field& refined() const { return depths.back(); }
};

/// Objective C(d) = sum_i w_i (d_i - dbar_i)^2 + mu sum_edges g_ij (d_i - d_j)^2.
/// Row partial sums are compensated and then added in row order, so the value
/// does not depend on the worker count.
inline double refine_objective(const Field& d, const Field& target, const WeightMaps& weights,
                               double mu, int workers = 1) {
  const int W = d.width();
  const int H = d.height();
  std::vector<double> rows(H, 0.0);
  parallel_rows(H, workers, [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      CompensatedSum s;
      for (int x = 0; x < W; ++x) {
        const double w = weights.w(x, y);
        if (w != 0.0) {
          const double r = d(x, y) - target(x, y);
          s.add(w * r * r);
        }
        if (mu != 0.0) {
          if (x + 1 < W) {
            const double e = d(x, y) - d(x + 1, y);
            s.add(mu * weights.horizontal(x, y) * e * e);
          }
          if (y + 1 < H) {
            const double e = d(x, y) - d(x, y + 1);
            s.add(mu * weights.vertical(x, y) * e * e);
          }
        }
      }
      rows[y] = s.value();
    }
  });
  CompensatedSum total;
  for (double r : rows) total.add(r);
  return total.value();
}

/// Damped Jacobi descent on the weighted least-squares objective.
///
/// Invalid pixels start at the median valid depth (1 m if none is valid) and
/// are filled in by the smoothness term. Each sweep reads iterate k and writes
/// iterate k+1, so results are identical for any worker count.
inline RefineResult refine(const InitialDepth& init, const WeightMaps& weights, const RefineConfig& cfg) {
  cfg.validate();
  require_same_size(init.depth, weights.w, "refine");
  const int W = init.width();
  const int H = init.height();
  if (weights.horizontal.width() != std::max(W - 1, 0) || weights.horizontal.height() != H ||
      weights.vertical.width() != W || weights.vertical.height() != std::max(H - 1, 0)) {
    throw InputError("refine: edge weight maps have the wrong shape");
  }

  std::vector<double> valid_depths;
  for (std::size_t i = 0; i < init.depth.pixel_count(); ++i) {
    if (init.valid.at(i)) {
      valid_depths.push_back(init.depth.at(i));
    } else if (weights.w.at(i) != 0.0) {
      throw InputError("refine: non-zero data weight on an invalid pixel");
    }
  }
  RefineResult result;
  result.fill_depth = valid_depths.empty() ? 1.0 : detail::median(std::move(valid_depths));

  Field target(W, H);
  for (std::size_t i = 0; i < target.pixel_count(); ++i) {
    target.at(i) = init.valid.at(i) ? static_cast<double>(init.depth.at(i)) : result.fill_depth;
  }

  Field diagonal(W, H);
  result.uncertainty = Field(W, H);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const double den = weights.w(x, y) + cfg.mu * weights.edge_sum(x, y);
      diagonal(x, y) = den;
      result.uncertainty(x, y) = den > 0.0 ? std::max(cfg.sigma_min, cfg.beta / std::sqrt(den)) : cfg.sigma_cap;
    }
  }

  result.depths.reserve(cfg.iterations + 1);
  result.depths.push_back(target);
  result.objective.push_back(refine_objective(target, target, weights, cfg.mu, cfg.workers));
  for (int k = 0; k < cfg.iterations; ++k) {
    const Field& cur = result.depths.back();
    Field next(W, H);
    parallel_rows(H, cfg.workers, [&](int y0, int y1) {
      for (int y = y0; y < y1; ++y) {
        for (int x = 0; x < W; ++x) {
          const double den = diagonal(x, y);
          if (den <= 0.0) {
            next(x, y) = cur(x, y);
            continue;
          }
          double neighbors = 0.0;
          if (x > 0) neighbors += weights.horizontal(x - 1, y) * cur(x - 1, y);
          if (x + 1 < W) neighbors += weights.horizontal(x, y) * cur(x + 1, y);
          if (y > 0) neighbors += weights.vertical(x, y - 1) * cur(x, y - 1);
          if (y + 1 < H) neighbors += weights.vertical(x, y) * cur(x, y + 1);
          const double jacobi = (weights.w(x, y) * target(x, y) + cfg.mu * neighbors) / den;
          next(x, y) = (1.0 - cfg.omega) * cur(x, y) + cfg.omega * jacobi;
        }
      }
    });
    result.objective.push_back(refine_objective(next, target, weights, cfg.mu, cfg.workers));
    result.depths.push_back(std::move(next));
  }
  return result;
}

inline constexpr double kDefaultNllLambda = 0.83;
inline constexpr int kDefaultNllIterations = 5;

/// Laplacian negative log-likelihood over iterates 0..K, iterate k weighted by
/// lambda^(K-k). Pixels count when the ground truth and the iterate are finite;
/// sums run in row-major order.
inline double laplacian_nll(std::span<const Field> depths, std::span<const Field> sigmas, const Field& gt,
                            double lambda = kDefaultNllLambda, int K = kDefaultNllIterations) {
  if (K < 0) throw InputError("laplacian_nll: K must be non-negative");
  if (depths.size() != static_cast<std::size_t>(K) + 1 || sigmas.size() != depths.size()) {
    throw InputError("laplacian_nll: expected K+1 depth and sigma maps");
  }
  if (!(lambda > 0.0 && lambda <= 1.0)) throw InputError("laplacian_nll: lambda must lie in (0, 1]");
  double total = 0.0;
  for (int k = 0; k <= K; ++k) {
    const Field& d = depths[k];
    const Field& s = sigmas[k];
    require_same_size(d, gt, "laplacian_nll");
    require_same_size(s, gt, "laplacian_nll");
    double inner = 0.0;
    for (std::size_t i = 0; i < gt.pixel_count(); ++i) {
      if (!std::isfinite(gt.at(i)) || !std::isfinite(d.at(i))) continue;
      const double sigma = s.at(i);
      if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw InputError("laplacian_nll: non-positive sigma on a valid pixel");
      }
      inner += std::abs(d.at(i) - gt.at(i)) / sigma + std::log(sigma);
    }
    total += std::pow(lambda, K - k) * inner;
  }
  return total;
}

/// Same, with one uncertainty map shared by every iterate.
inline double laplacian_nll(std::span<const Field> depths, const Field& sigma, const Field& gt,
                            double lambda = kDefaultNllLambda, int K = kDefaultNllIterations) {
  std::vector<Field> sigmas(depths.size(), sigma);
  return laplacian_nll(depths, sigmas, gt, lambda, K);
}

}  // namespace triad
