#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "triad/config.hpp"
#include "triad/errors.hpp"
#include "triad/geometry.hpp"
#include "triad/metrics.hpp"
#include "triad/rasterio.hpp"
#include "triad/refine.hpp"
#include "triad/select.hpp"
#include "triad/synth.hpp"
#include "triad/triangulate.hpp"

namespace triad {

// ---------------------------------------------------------------------------
// Bundle layout

namespace detail {

inline std::string pad5(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%05zu", i);
  return buf;
}

inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline std::string flow_name(const std::string& kind, std::size_t keyframe, std::size_t frame) {
  return kind + "_" + detail::pad5(keyframe) + "_" + detail::pad5(frame) + ".flo";
}
inline std::string gt_name(std::size_t keyframe) { return "gt_" + detail::pad5(keyframe) + ".pfm"; }
inline std::string image_name(std::size_t keyframe) { return detail::pad5(keyframe) + ".pgm"; }
inline constexpr const char* kManifestName = "manifest.txt";

struct ManifestEntry {
  std::string path;  // relative to the bundle root
  std::uint64_t seed = 0;
};

struct Manifest {
  std::uint64_t seed = 0;
  std::vector<std::size_t> keyframes;
  int sequence_length = 0;
  std::vector<ManifestEntry> artifacts;

  std::string format() const {
    std::string out = "# triad synthetic bundle\n";
    out += "seed = " + std::to_string(seed) + "\n";
    out += "sequence_length = " + std::to_string(sequence_length) + "\n";
    std::string kfs;
    for (auto k : keyframes) kfs += (kfs.empty() ? "" : ",") + std::to_string(k);
    out += "keyframe = " + kfs + "\n";
    for (const auto& a : artifacts) out += "artifact " + a.path + " " + std::to_string(a.seed) + "\n";
    return out;
  }

  static Manifest read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    Manifest m;
    std::string line;
    while (std::getline(in, line)) {
      line = detail::trim(line);
      if (line.empty() || line[0] == '#') continue;
      if (line.rfind("artifact ", 0) == 0) {
        std::istringstream ls(line.substr(9));
        ManifestEntry e;
        if (!(ls >> e.path >> e.seed)) throw FormatError(path.string() + ": bad artifact line");
        m.artifacts.push_back(e);
        continue;
      }
      const auto [k, v] = split_assignment(line);
      if (k == "seed") {
        m.seed = detail::parse_int<std::uint64_t>(k, v);
      } else if (k == "keyframe") {
        m.keyframes = detail::parse_index_list(k, v);
      } else if (k == "sequence_length") {
        m.sequence_length = detail::parse_int<int>(k, v);
      } else {
        throw FormatError(path.string() + ": unknown manifest key '" + k + "'");
      }
    }
    return m;
  }
};

// ---------------------------------------------------------------------------
// synth

inline std::uint64_t scene_seed(std::uint64_t seed, std::size_t keyframe, std::size_t index) {
  return index == 0 ? seed : mix_seed(seed, 0x5ce0000 + keyframe);
}

inline std::uint64_t noise_seed(std::uint64_t seed, std::size_t keyframe, std::size_t frame) {
  return mix_seed(seed, (static_cast<std::uint64_t>(keyframe) << 24) + frame + 1);
}

inline std::vector<std::size_t> synth_keyframes(const RunConfig& cfg) {
  if (!cfg.keyframes.empty()) return cfg.keyframes;
  return {static_cast<std::size_t>(cfg.motion.frames / 2)};
}

/// Writes a synthetic bundle under the root: trajectory, intrinsics, exact and
/// corrupted flow from each keyframe to every other frame, ground-truth depth,
/// keyframe texture and a manifest naming every artifact with its seed.
inline Manifest cmd_synth(const RunConfig& cfg) {
  const Intrinsics K = cfg.synth_intrinsics();
  K.validate();
  const Trajectory traj = make_trajectory(cfg.trajectory_kind, cfg.motion);
  const auto keyframes = synth_keyframes(cfg);

  Manifest manifest;
  manifest.seed = cfg.seed;
  manifest.keyframes = keyframes;
  manifest.sequence_length = static_cast<int>(traj.size());

  write_trajectory(traj, cfg.resolve(cfg.trajectory));
  manifest.artifacts.push_back({cfg.trajectory, cfg.seed});
  write_intrinsics(K, cfg.resolve(cfg.intrinsics));
  manifest.artifacts.push_back({cfg.intrinsics, cfg.seed});

  for (std::size_t n = 0; n < keyframes.size(); ++n) {
    const std::size_t kf = keyframes[n];
    if (kf >= traj.size()) throw ConfigError("keyframe " + std::to_string(kf) + " beyond the sequence");
    SceneParams sp = cfg.scene;
    sp.seed = scene_seed(cfg.seed, kf, n);
    const SyntheticScene scene = SyntheticScene::generate(sp);

    const std::string depth_rel = (std::filesystem::path(cfg.gt_dir) / gt_name(kf)).string();
    write_pfm(scene.depth_map(), cfg.resolve(depth_rel));
    manifest.artifacts.push_back({depth_rel, sp.seed});
    const std::string image_rel = (std::filesystem::path(cfg.image_dir) / image_name(kf)).string();
    write_image(scene.texture(), cfg.resolve(image_rel));
    manifest.artifacts.push_back({image_rel, sp.seed});

    for (std::size_t j = 0; j < traj.size(); ++j) {
      if (j == kf) continue;
      const FlowField exact = render_flow(scene, K, traj.keyframe_to_frame(kf, j), cfg.workers);
      NoiseModel noise = cfg.noise;
      noise.seed = noise_seed(cfg.seed, kf, j);
      const FlowField noisy = corrupt_flow(exact, noise);
      const std::string exact_rel = (std::filesystem::path(cfg.flow_dir) / flow_name("exact", kf, j)).string();
      const std::string noisy_rel = (std::filesystem::path(cfg.flow_dir) / flow_name("noisy", kf, j)).string();
      write_flow(exact.to_raster(), cfg.resolve(exact_rel));
      manifest.artifacts.push_back({exact_rel, sp.seed});
      write_flow(noisy.to_raster(), cfg.resolve(noisy_rel));
      manifest.artifacts.push_back({noisy_rel, noise.seed});
    }
  }
  detail::write_file(cfg.resolve(kManifestName), manifest.format());
  return manifest;
}

// ---------------------------------------------------------------------------
// Shared steps

inline std::vector<std::size_t> resolve_keyframes(const RunConfig& cfg) {
  if (!cfg.keyframes.empty()) return cfg.keyframes;
  const auto manifest_path = cfg.resolve(kManifestName);
  if (std::filesystem::exists(manifest_path)) {
    auto m = Manifest::read(manifest_path);
    if (!m.keyframes.empty()) return m.keyframes;
  }
  throw ConfigError("no keyframe given and no manifest to take it from");
}

struct FrameChoice {
  Selection selection;
  std::vector<std::string> warnings;
};

inline FrameChoice choose_frames(const RunConfig& cfg, const Trajectory& traj, std::size_t keyframe) {
  FrameChoice out;
  if (!cfg.frames.empty()) {
    for (auto j : cfg.frames) {
      if (j >= traj.size() || j == keyframe) throw InputError("frames: bad frame index " + std::to_string(j));
    }
    out.selection.indices = cfg.frames;
    std::ranges::sort(out.selection.indices);
    return out;
  }
  out.selection = select_frames(traj, keyframe, cfg.selection);
  if (out.selection.shortfall) {
    out.warnings.push_back("selection shortfall: " + std::to_string(out.selection.indices.size()) + " of " +
                           std::to_string(cfg.selection.n_frames - 1) + " adjacent frames found");
  }
  if (out.selection.indices.empty()) throw InputError("no adjacent frames available for keyframe " + std::to_string(keyframe));
  return out;
}

inline TriangulationInput load_triangulation_input(const RunConfig& cfg, const Trajectory& traj,
                                                   const Intrinsics& K, std::size_t keyframe,
                                                   const std::vector<std::size_t>& frames) {
  TriangulationInput input{K, {}};
  for (auto j : frames) {
    const auto path = cfg.resolve(cfg.flow_dir) / flow_name(cfg.flow_kind, keyframe, j);
    input.frames.push_back({FlowField::from_raster(read_flow(path)), traj.keyframe_to_frame(keyframe, j)});
  }
  return input;
}

inline Raster<1> load_intensity(const RunConfig& cfg, std::size_t keyframe, int width, int height,
                                std::vector<std::string>& warnings) {
  const auto path = cfg.resolve(cfg.image_dir) / image_name(keyframe);
  if (!std::filesystem::exists(path)) {
    warnings.push_back("no keyframe image at " + path.string() + "; smoothness weights left uniform");
    return Raster<1>(width, height, 0.5f);
  }
  Raster<1> img = read_image(path);
  if (img.width() != width || img.height() != height) throw InputError("keyframe image size does not match");
  return img;
}

inline std::optional<Raster<1>> load_ground_truth(const RunConfig& cfg, std::size_t keyframe) {
  const auto path = cfg.resolve(cfg.gt_dir) / gt_name(keyframe);
  if (!std::filesystem::exists(path)) return std::nullopt;
  return read_pfm<1>(path);
}

inline std::string format_objective_log(const std::vector<double>& objective) {
  std::string out;
  for (std::size_t k = 0; k < objective.size(); ++k) out += std::to_string(k) + " " + detail::fmt17(objective[k]) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// estimate

struct KeyframeEstimate {
  std::size_t keyframe = 0;
  Selection selection;
  std::vector<std::string> warnings;
  InitialDepth initial;
  RefineResult refined;
  std::optional<Raster<1>> ground_truth;
  std::optional<MetricReport> initial_metrics;
  std::optional<MetricReport> refined_metrics;
  std::optional<Correlation> correlation;
  std::optional<double> nll;
  std::vector<SweepRow> sweep;
};

/// Select, triangulate, weight, refine and (given ground truth) evaluate one
/// keyframe, entirely in memory.
inline KeyframeEstimate estimate_keyframe(const RunConfig& cfg, std::size_t keyframe, int workers) {
  const Trajectory traj = read_trajectory(cfg.resolve(cfg.trajectory));
  const Intrinsics K = read_intrinsics(cfg.resolve(cfg.intrinsics));
  if (keyframe >= traj.size()) throw InputError("keyframe " + std::to_string(keyframe) + " beyond the trajectory");

  KeyframeEstimate est;
  est.keyframe = keyframe;
  auto choice = choose_frames(cfg, traj, keyframe);
  est.selection = std::move(choice.selection);
  est.warnings = std::move(choice.warnings);

  TriangulationOptions topts = cfg.triangulation;
  topts.workers = workers;
  est.initial = triangulate_map(load_triangulation_input(cfg, traj, K, keyframe, est.selection.indices), topts);
  if (est.initial.valid_count() == 0) throw NumericalError("every pixel of keyframe " + std::to_string(keyframe) + " is degenerate");

  const Raster<1> intensity = load_intensity(cfg, keyframe, K.width, K.height, est.warnings);
  RefineConfig rcfg = cfg.refine;
  rcfg.workers = workers;
  const WeightMaps weights = build_weights(est.initial, intensity, rcfg);
  est.refined = refine(est.initial, weights, rcfg);

  est.ground_truth = load_ground_truth(cfg, keyframe);
  if (est.ground_truth) {
    const Raster<1>& gt = *est.ground_truth;
    require_same_size(gt, est.initial.depth, "ground truth");
    est.initial_metrics = evaluate(est.initial.depth, gt, est.initial.valid);
    est.refined_metrics = evaluate(est.refined.refined(), gt);
    const Field gt_field = to_field(gt);
    est.correlation = error_uncertainty_correlation(est.refined.refined(), est.refined.uncertainty, gt_field);
    est.nll = laplacian_nll(est.refined.depths, est.refined.uncertainty, gt_field, cfg.nll_lambda,
                            static_cast<int>(est.refined.depths.size()) - 1);
    est.sweep = uncertainty_sweep(est.refined.refined(), est.refined.uncertainty, gt, cfg.sweep_thresholds);
  }
  return est;
}

inline std::string format_estimate_report(const KeyframeEstimate& est) {
  std::string out = "keyframe " + std::to_string(est.keyframe) + "\nframes";
  for (auto j : est.selection.indices) out += " " + std::to_string(j);
  out += "\nvalid_initial " + std::to_string(est.initial.valid_count()) + "\n";
  for (const auto& w : est.warnings) out += "warning: " + w + "\n";
  if (est.initial_metrics) out += format_report("initial", *est.initial_metrics);
  if (est.refined_metrics) out += format_report("refined", *est.refined_metrics);
  if (est.correlation) {
    out += "[uncertainty]\n  spearman_rho " + detail::fmt(est.correlation->rho) +
           (est.correlation->defined ? "" : " (undefined: constant input)") + "\n";
    if (est.nll) out += "  laplacian_nll " + detail::fmt(*est.nll) + "\n";
    for (const auto& row : est.sweep) {
      out += "  sigma<" + detail::fmt(row.sigma_threshold) + " coverage " + detail::fmt(row.coverage_percent) + "%";
      out += row.metrics ? " rmse " + detail::fmt(row.metrics->rmse) : std::string(" rmse n/a");
      out += "\n";
    }
  }
  return out;
}

inline std::string format_estimate_kv(const KeyframeEstimate& est) {
  std::string out = "keyframe=" + std::to_string(est.keyframe) + "\n";
  std::string frames;
  for (auto j : est.selection.indices) frames += (frames.empty() ? "" : ",") + std::to_string(j);
  out += "frames=" + frames + "\n";
  out += "shortfall=" + std::string(est.selection.shortfall ? "1" : "0") + "\n";
  out += "valid_initial=" + std::to_string(est.initial.valid_count()) + "\n";
  out += "warnings=" + std::to_string(est.warnings.size()) + "\n";
  if (est.initial_metrics) out += format_report_kv("initial", *est.initial_metrics);
  if (est.refined_metrics) out += format_report_kv("refined", *est.refined_metrics);
  if (est.correlation) {
    out += "uncertainty.spearman_rho=" + detail::fmt(est.correlation->rho) + "\n";
    out += "uncertainty.spearman_defined=" + std::string(est.correlation->defined ? "1" : "0") + "\n";
  }
  if (est.nll) out += "uncertainty.laplacian_nll=" + detail::fmt(*est.nll) + "\n";
  return out;
}

inline std::filesystem::path keyframe_out_dir(const RunConfig& cfg, std::size_t keyframe, bool many) {
  auto dir = cfg.resolve(cfg.out_dir);
  return many ? dir / ("kf_" + detail::pad5(keyframe)) : dir;
}

inline void write_initial(const InitialDepth& init, const std::filesystem::path& dir) {
  write_pfm(init.depth, dir / "initial_depth.pfm");
  write_pfm(init.conf_h, dir / "conf_h.pfm");
  write_pfm(init.conf_r, dir / "conf_r.pfm");
}

inline void write_refined(const RefineResult& r, const std::filesystem::path& dir) {
  write_pfm(to_raster(r.refined()), dir / "refined_depth.pfm");
  write_pfm(to_raster(r.uncertainty), dir / "uncertainty.pfm");
  detail::write_file(dir / "objective.log", format_objective_log(r.objective));
}

/// Runs `fn(keyframe, inner_workers)` for every keyframe; several keyframes
/// share the worker budget one per thread, a single keyframe gets all of it.
template <typename Result, typename Fn>
std::vector<Result> for_each_keyframe(const std::vector<std::size_t>& keyframes, int workers, Fn&& fn) {
  std::vector<std::optional<Result>> slots(keyframes.size());
  if (keyframes.size() == 1) {
    slots[0] = fn(keyframes[0], workers);
  } else {
    parallel_rows(static_cast<int>(keyframes.size()), workers, [&](int b, int e) {
      for (int i = b; i < e; ++i) slots[i] = fn(keyframes[i], 1);
    });
  }
  std::vector<Result> out;
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

inline std::vector<KeyframeEstimate> cmd_estimate(const RunConfig& cfg) {
  const auto keyframes = resolve_keyframes(cfg);
  auto results = for_each_keyframe<KeyframeEstimate>(
      keyframes, cfg.workers, [&](std::size_t kf, int w) { return estimate_keyframe(cfg, kf, w); });
  const bool many = keyframes.size() > 1;
  for (const auto& est : results) {
    const auto dir = keyframe_out_dir(cfg, est.keyframe, many);
    write_initial(est.initial, dir);
    write_refined(est.refined, dir);
    detail::write_file(dir / "report.txt", format_estimate_report(est));
    detail::write_file(dir / "report.kv", format_estimate_kv(est));
    if (est.ground_truth) detail::write_file(dir / "sweep.csv", format_sweep_csv(est.sweep));
  }
  return results;
}

// ---------------------------------------------------------------------------
// triangulate / refine / select / eval

struct KeyframeTriangulation {
  std::size_t keyframe = 0;
  Selection selection;
  std::vector<std::string> warnings;
  InitialDepth initial;
};

inline std::vector<KeyframeTriangulation> cmd_triangulate(const RunConfig& cfg) {
  const Trajectory traj = read_trajectory(cfg.resolve(cfg.trajectory));
  const Intrinsics K = read_intrinsics(cfg.resolve(cfg.intrinsics));
  const auto keyframes = resolve_keyframes(cfg);
  auto results = for_each_keyframe<KeyframeTriangulation>(keyframes, cfg.workers, [&](std::size_t kf, int w) {
    if (kf >= traj.size()) throw InputError("keyframe " + std::to_string(kf) + " beyond the trajectory");
    KeyframeTriangulation t;
    t.keyframe = kf;
    auto choice = choose_frames(cfg, traj, kf);
    t.selection = std::move(choice.selection);
    t.warnings = std::move(choice.warnings);
    TriangulationOptions opts = cfg.triangulation;
    opts.workers = w;
    t.initial = triangulate_map(load_triangulation_input(cfg, traj, K, kf, t.selection.indices), opts);
    if (t.initial.valid_count() == 0) throw NumericalError("every pixel of keyframe " + std::to_string(kf) + " is degenerate");
    return t;
  });
  const bool many = keyframes.size() > 1;
  for (const auto& t : results) write_initial(t.initial, keyframe_out_dir(cfg, t.keyframe, many));
  return results;
}

inline std::vector<RefineResult> cmd_refine(const RunConfig& cfg) {
  const auto keyframes = resolve_keyframes(cfg);
  const bool many = keyframes.size() > 1;
  const std::string input_dir = cfg.input_dir.empty() ? cfg.out_dir : cfg.input_dir;
  auto results = for_each_keyframe<RefineResult>(keyframes, cfg.workers, [&](std::size_t kf, int w) {
    auto dir = cfg.resolve(input_dir);
    if (many) dir /= "kf_" + detail::pad5(kf);
    InitialDepth init = InitialDepth::from_rasters(read_pfm<1>(dir / "initial_depth.pfm"),
                                                   read_pfm<1>(dir / "conf_h.pfm"), read_pfm<1>(dir / "conf_r.pfm"));
    std::vector<std::string> warnings;
    const Raster<1> intensity = load_intensity(cfg, kf, init.width(), init.height(), warnings);
    for (const auto& msg : warnings) std::cerr << "warning: " << msg << "\n";
    RefineConfig rcfg = cfg.refine;
    rcfg.workers = w;
    return refine(init, build_weights(init, intensity, rcfg), rcfg);
  });
  for (std::size_t i = 0; i < keyframes.size(); ++i) write_refined(results[i], keyframe_out_dir(cfg, keyframes[i], many));
  return results;
}

inline Selection cmd_select(const RunConfig& cfg, std::size_t keyframe) {
  const Trajectory traj = read_trajectory(cfg.resolve(cfg.trajectory));
  return select_frames(traj, keyframe, cfg.selection);
}

inline std::string format_selection(const Selection& s) {
  std::string out;
  for (auto j : s.indices) out += std::to_string(j) + "\n";
  return out;
}

struct EvalOutcome {
  MetricReport report;
  std::optional<Correlation> correlation;
  std::vector<SweepRow> sweep;
  std::string text;
};

inline EvalOutcome cmd_eval(const RunConfig& cfg) {
  if (cfg.pred.empty() || cfg.gt.empty()) throw ConfigError("eval needs both 'pred' and 'gt'");
  const Raster<1> pred = read_pfm<1>(cfg.resolve(cfg.pred));
  const Raster<1> gt = read_pfm<1>(cfg.resolve(cfg.gt));
  EvalOutcome out;
  out.report = evaluate(pred, gt);
  out.text = format_report("eval", out.report);
  std::string kv = format_report_kv("eval", out.report);
  const auto dir = cfg.resolve(cfg.out_dir);
  if (!cfg.sigma.empty()) {
    const Raster<1> sigma = read_pfm<1>(cfg.resolve(cfg.sigma));
    out.correlation = error_uncertainty_correlation(pred, sigma, gt);
    out.sweep = uncertainty_sweep(pred, sigma, gt, cfg.sweep_thresholds);
    out.text += "[uncertainty]\n  spearman_rho " + detail::fmt(out.correlation->rho) + "\n";
    kv += "uncertainty.spearman_rho=" + detail::fmt(out.correlation->rho) + "\n";
    detail::write_file(dir / "eval_sweep.csv", format_sweep_csv(out.sweep));
  }
  detail::write_file(dir / "eval_report.txt", out.text);
  detail::write_file(dir / "eval_report.kv", kv);
  return out;
}

// ---------------------------------------------------------------------------
// ablate

inline constexpr std::array<int, 6> kAblationIterations = {0, 1, 3, 5, 7, 9};

struct AblationRow {
  std::string study;  // "initial", "iterations" or "confidence"
  int iterations = 0;
  ConfidenceInputs confidence = ConfidenceInputs::kFull;
  MetricReport metrics;
};

/// Refinement-depth sweep and confidence-input variants on one keyframe with
/// ground truth; triangulation runs once and is shared by every row.
inline std::vector<AblationRow> run_ablation(const RunConfig& cfg, std::size_t keyframe) {
  const Trajectory traj = read_trajectory(cfg.resolve(cfg.trajectory));
  const Intrinsics K = read_intrinsics(cfg.resolve(cfg.intrinsics));
  const auto gt = load_ground_truth(cfg, keyframe);
  if (!gt) throw InputError("ablate: no ground truth for keyframe " + std::to_string(keyframe));
  const auto choice = choose_frames(cfg, traj, keyframe);
  TriangulationOptions topts = cfg.triangulation;
  topts.workers = cfg.workers;
  const InitialDepth init = triangulate_map(load_triangulation_input(cfg, traj, K, keyframe, choice.selection.indices), topts);
  if (init.valid_count() == 0) throw NumericalError("every pixel is degenerate");
  std::vector<std::string> warnings;
  const Raster<1> intensity = load_intensity(cfg, keyframe, K.width, K.height, warnings);

  std::vector<AblationRow> rows;
  rows.push_back({"initial", 0, ConfidenceInputs::kFull, evaluate(init.depth, *gt, init.valid)});

  RefineConfig base = cfg.refine;
  base.workers = cfg.workers;
  base.confidence = ConfidenceInputs::kFull;
  base.iterations = *std::ranges::max_element(kAblationIterations);
  const RefineResult full = refine(init, build_weights(init, intensity, base), base);
  for (int k : kAblationIterations) {
    rows.push_back({"iterations", k, ConfidenceInputs::kFull, evaluate(full.depths[k], *gt)});
  }
  for (auto c : {ConfidenceInputs::kDepthOnly, ConfidenceInputs::kResidualOnly, ConfidenceInputs::kHessianOnly,
                 ConfidenceInputs::kFull}) {
    RefineConfig rc = cfg.refine;
    rc.workers = cfg.workers;
    rc.confidence = c;
    const RefineResult r = refine(init, build_weights(init, intensity, rc), rc);
    rows.push_back({"confidence", rc.iterations, c, evaluate(r.refined(), *gt)});
  }
  return rows;
}

inline std::string format_ablation_csv(const std::vector<AblationRow>& rows) {
  std::string out = "study,iterations,confidence," + metric_csv_header() + "\n";
  for (const auto& r : rows) {
    out += r.study + "," + std::to_string(r.iterations) + "," + to_string(r.confidence) + "," +
           metric_csv_fields(r.metrics) + "\n";
  }
  return out;
}

inline std::vector<AblationRow> cmd_ablate(const RunConfig& cfg) {
  const auto keyframes = resolve_keyframes(cfg);
  const auto rows = run_ablation(cfg, keyframes.front());
  detail::write_file(cfg.resolve(cfg.out_dir) / "ablation.csv", format_ablation_csv(rows));
  return rows;
}

}  // namespace triad
