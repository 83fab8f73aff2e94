#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "triad/errors.hpp"
#include "triad/geometry.hpp"
#include "triad/metrics.hpp"
#include "triad/refine.hpp"
#include "triad/select.hpp"
#include "triad/synth.hpp"
#include "triad/triangulate.hpp"

namespace triad {

/// Everything a pipeline run needs. Paths are relative to `root`.
struct RunConfig {
  std::filesystem::path root = ".";

  std::string trajectory = "trajectory.txt";
  std::string intrinsics = "intrinsics.txt";
  std::string flow_dir = "flow";
  std::string image_dir = "image";
  std::string gt_dir = "depth";
  std::string out_dir = "out";
  std::string input_dir;  // initial-depth PFMs for `refine`; defaults to out_dir
  std::string flow_kind = "noisy";

  std::vector<std::size_t> keyframes;  // empty: taken from the bundle manifest
  std::vector<std::size_t> frames;     // explicit adjacent frames, bypasses selection

  SelectionPolicy selection;
  TriangulationOptions triangulation;
  RefineConfig refine;
  double nll_lambda = kDefaultNllLambda;
  std::vector<double> sweep_thresholds{kDefaultSweepThresholds.begin(), kDefaultSweepThresholds.end()};

  // Synthetic bundles.
  SceneParams scene;
  std::optional<double> fx, fy, cx, cy;
  TrajectoryKind trajectory_kind = TrajectoryKind::kConstantVelocity;
  TrajectoryParams motion;
  NoiseModel noise;
  std::uint64_t seed = 1;

  // `eval` inputs.
  std::string pred;
  std::string sigma;
  std::string gt;

  int workers = 1;

  std::filesystem::path resolve(const std::string& relative) const { return root / relative; }

  Intrinsics synth_intrinsics() const {
    Intrinsics K;
    K.width = scene.width;
    K.height = scene.height;
    K.fx = fx.value_or(0.8 * scene.width);
    K.fy = fy.value_or(K.fx);
    K.cx = cx.value_or(0.5 * (scene.width - 1));
    K.cy = cy.value_or(0.5 * (scene.height - 1));
    return K;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a number, got '" + v + "'");
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(v);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::vector<std::size_t> parse_index_list(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  for (const auto& s : split_list(v)) out.push_back(parse_int<std::size_t>(key, s));
  return out;
}

inline std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split_list(v)) out.push_back(parse_double(key, s));
  return out;
}

inline Vec3 parse_vec3(const std::string& key, const std::string& v) {
  const auto d = parse_double_list(key, v);
  if (d.size() != 3) throw ConfigError(key + ": expected three comma-separated numbers");
  return {d[0], d[1], d[2]};
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

inline const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto str = [&](const char* k, std::string RunConfig::*m) {
      t[k] = [m](RunConfig& c, const std::string& v) { c.*m = v; };
    };
    auto num = [&](const char* k, auto getter) {
      t[k] = [k, getter](RunConfig& c, const std::string& v) { getter(c) = parse_double(k, v); };
    };
    auto integer = [&](const char* k, auto getter) {
      t[k] = [k, getter](RunConfig& c, const std::string& v) {
        using T = std::remove_reference_t<decltype(getter(c))>;
        getter(c) = parse_int<T>(k, v);
      };
    };

    str("trajectory", &RunConfig::trajectory);
    str("intrinsics", &RunConfig::intrinsics);
    str("flow_dir", &RunConfig::flow_dir);
    str("image_dir", &RunConfig::image_dir);
    str("gt_dir", &RunConfig::gt_dir);
    str("out_dir", &RunConfig::out_dir);
    str("input_dir", &RunConfig::input_dir);
    str("pred", &RunConfig::pred);
    str("sigma", &RunConfig::sigma);
    str("gt", &RunConfig::gt);
    t["flow_kind"] = [](RunConfig& c, const std::string& v) {
      if (v != "noisy" && v != "exact") throw ConfigError("flow_kind: expected 'noisy' or 'exact'");
      c.flow_kind = v;
    };
    t["keyframe"] = [](RunConfig& c, const std::string& v) { c.keyframes = parse_index_list("keyframe", v); };
    t["frames"] = [](RunConfig& c, const std::string& v) { c.frames = parse_index_list("frames", v); };

    t["select_mode"] = [](RunConfig& c, const std::string& v) { c.selection.mode = parse_selection_mode(v); };
    t["anchor"] = [](RunConfig& c, const std::string& v) { c.selection.anchor = parse_selection_anchor(v); };
    integer("n_frames", [](RunConfig& c) -> int& { return c.selection.n_frames; });
    integer("fixed_step", [](RunConfig& c) -> int& { return c.selection.fixed_step; });
    num("theta_min", [](RunConfig& c) -> double& { return c.selection.theta_min; });
    num("t_min", [](RunConfig& c) -> double& { return c.selection.t_min; });

    num("h_eps", [](RunConfig& c) -> double& { return c.triangulation.hessian_epsilon; });
    num("d_max", [](RunConfig& c) -> double& { return c.triangulation.max_depth; });

    integer("iterations", [](RunConfig& c) -> int& { return c.refine.iterations; });
    num("mu", [](RunConfig& c) -> double& { return c.refine.mu; });
    num("kappa", [](RunConfig& c) -> double& { return c.refine.kappa; });
    num("omega", [](RunConfig& c) -> double& { return c.refine.omega; });
    num("tau", [](RunConfig& c) -> double& { return c.refine.tau; });
    num("w_max", [](RunConfig& c) -> double& { return c.refine.w_max; });
    num("sigma_min", [](RunConfig& c) -> double& { return c.refine.sigma_min; });
    num("beta", [](RunConfig& c) -> double& { return c.refine.beta; });
    num("sigma_cap", [](RunConfig& c) -> double& { return c.refine.sigma_cap; });
    t["confidence"] = [](RunConfig& c, const std::string& v) { c.refine.confidence = parse_confidence_inputs(v); };
    num("nll_lambda", [](RunConfig& c) -> double& { return c.nll_lambda; });
    t["sweep"] = [](RunConfig& c, const std::string& v) { c.sweep_thresholds = parse_double_list("sweep", v); };

    integer("width", [](RunConfig& c) -> int& { return c.scene.width; });
    integer("height", [](RunConfig& c) -> int& { return c.scene.height; });
    t["fx"] = [](RunConfig& c, const std::string& v) { c.fx = parse_double("fx", v); };
    t["fy"] = [](RunConfig& c, const std::string& v) { c.fy = parse_double("fy", v); };
    t["cx"] = [](RunConfig& c, const std::string& v) { c.cx = parse_double("cx", v); };
    t["cy"] = [](RunConfig& c, const std::string& v) { c.cy = parse_double("cy", v); };
    num("base_depth", [](RunConfig& c) -> double& { return c.scene.base_depth; });
    integer("bumps", [](RunConfig& c) -> int& { return c.scene.bumps; });
    num("tilt", [](RunConfig& c) -> double& { return c.scene.tilt; });
    num("max_amplitude", [](RunConfig& c) -> double& { return c.scene.max_amplitude; });
    integer("texture_waves", [](RunConfig& c) -> int& { return c.scene.texture_waves; });
    num("texture_max_frequency", [](RunConfig& c) -> double& { return c.scene.texture_max_frequency; });

    t["trajectory_kind"] = [](RunConfig& c, const std::string& v) { c.trajectory_kind = parse_trajectory_kind(v); };
    integer("sequence_length", [](RunConfig& c) -> int& { return c.motion.frames; });
    num("frame_interval", [](RunConfig& c) -> double& { return c.motion.frame_interval; });
    t["velocity"] = [](RunConfig& c, const std::string& v) { c.motion.velocity = parse_vec3("velocity", v); };
    t["angular_velocity"] = [](RunConfig& c, const std::string& v) {
      c.motion.angular_velocity = parse_vec3("angular_velocity", v);
    };
    integer("move_frames", [](RunConfig& c) -> int& { return c.motion.move_frames; });
    integer("dwell_frames", [](RunConfig& c) -> int& { return c.motion.dwell_frames; });
    num("orbit_radius", [](RunConfig& c) -> double& { return c.motion.orbit_radius; });
    integer("orbit_steps", [](RunConfig& c) -> int& { return c.motion.orbit_steps; });

    num("sigma_flow", [](RunConfig& c) -> double& { return c.noise.sigma_flow; });
    num("outlier_rate", [](RunConfig& c) -> double& { return c.noise.outlier_rate; });
    num("outlier_span", [](RunConfig& c) -> double& { return c.noise.outlier_span; });
    integer("seed", [](RunConfig& c) -> std::uint64_t& { return c.seed; });
    t["workers"] = [](RunConfig& c, const std::string& v) {
      c.workers = parse_int<int>("workers", v);
      if (c.workers < 1) throw ConfigError("workers must be at least 1");
    };
    return t;
  }();
  return table;
}

}  // namespace detail

inline std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : detail::setters()) keys.push_back(k);
  return keys;
}

/// Applies one `key = value` assignment; unknown keys are a ConfigError.
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  const auto& table = detail::setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second(cfg, value);
}

/// Parses "key=value" (whitespace around '=' allowed).
inline std::pair<std::string, std::string> split_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key = value, got '" + text + "'");
  return {detail::trim(text.substr(0, eq)), detail::trim(text.substr(eq + 1))};
}

/// Line-oriented `key = value` file; '#' starts a comment.
inline std::vector<std::pair<std::string, std::string>> parse_config_text(std::istream& in,
                                                                          const std::string& what) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    try {
      out.push_back(split_assignment(line));
    } catch (const ConfigError& e) {
      throw ConfigError(what + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

/// Checks the parameter blocks up front so bad values surface as configuration
/// errors rather than failures halfway through a run.
inline void validate_run_config(const RunConfig& cfg) {
  try {
    cfg.selection.validate();
    cfg.refine.validate();
    cfg.noise.validate();
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  if (cfg.workers < 1) throw ConfigError("workers must be at least 1");
  if (!(cfg.nll_lambda > 0.0 && cfg.nll_lambda <= 1.0)) throw ConfigError("nll_lambda must lie in (0, 1]");
  for (double t : cfg.sweep_thresholds) {
    if (!(t > 0.0)) throw ConfigError("sweep thresholds must be positive");
  }
}

inline void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  for (const auto& [k, v] : parse_config_text(in, path.string())) apply_setting(cfg, k, v);
}

/// Environment overrides: TRIAD_<KEY> for every config key (upper-cased).
inline void apply_environment(RunConfig& cfg,
                              const std::function<const char*(const char*)>& getenv_fn = [](const char* n) {
                                return std::getenv(n);
                              }) {
  for (const auto& key : config_keys()) {
    std::string name = "TRIAD_" + key;
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
    if (const char* v = getenv_fn(name.c_str())) apply_setting(cfg, key, detail::trim(v));
  }
}

}  // namespace triad
