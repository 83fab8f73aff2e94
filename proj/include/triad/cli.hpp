#pragma once

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "triad/config.hpp"
#include "triad/errors.hpp"
#include "triad/pipeline.hpp"

namespace triad {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumerical = 3 };

inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
  if (dynamic_cast<const ConfigError*>(&e)) return kExitUsage;
  if (dynamic_cast<const Error*>(&e)) return kExitData;
  return kExitData;
}

struct CliOptions {
  std::string root;
  std::string config;
  std::vector<std::string> sets;
  int workers = 0;
  std::string keyframe;
  std::string frames;
  std::string out;
  std::string mode;
  std::string pred, sigma, gt;
};

/// Defaults, then the config file, then TRIAD_* variables, then flags.
inline RunConfig build_run_config(const CliOptions& o) {
  RunConfig cfg;
  cfg.root = o.root;
  if (!o.config.empty()) {
    std::filesystem::path p = o.config;
    if (p.is_relative() && !std::filesystem::exists(p)) p = cfg.root / p;
    apply_config_file(cfg, p);
  }
  apply_environment(cfg);
  auto set = [&](const char* key, const std::string& v) {
    if (!v.empty()) apply_setting(cfg, key, v);
  };
  set("keyframe", o.keyframe);
  set("frames", o.frames);
  set("out_dir", o.out);
  set("select_mode", o.mode);
  set("pred", o.pred);
  set("sigma", o.sigma);
  set("gt", o.gt);
  for (const auto& s : o.sets) {
    const auto [k, v] = split_assignment(s);
    apply_setting(cfg, k, v);
  }
  if (o.workers > 0) cfg.workers = o.workers;
  validate_run_config(cfg);
  return cfg;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"triad: multi-view dense depth from optical flow and poses"};
  app.require_subcommand(1);
  CliOptions o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--root", o.root, "bundle root; every path is relative to it")->required();
    sub->add_option("--config", o.config, "key = value config file");
    sub->add_option("--set", o.sets, "override a config key (key=value), repeatable");
    sub->add_option("--workers", o.workers, "worker threads");
    sub->add_option("--keyframe", o.keyframe, "keyframe index, or a comma list");
    sub->add_option("--out", o.out, "output directory");
  };
  auto with_frames = [&](CLI::App* sub) {
    sub->add_option("--frames", o.frames, "explicit adjacent frames, bypassing selection");
    sub->add_option("--mode", o.mode, "selection mode: fixed or adaptive");
  };

  auto* synth = app.add_subcommand("synth", "write a synthetic bundle");
  auto* select = app.add_subcommand("select", "print the adjacent frames chosen for a keyframe");
  auto* tri = app.add_subcommand("triangulate", "initial depth and confidences");
  auto* ref = app.add_subcommand("refine", "refine an initial depth map");
  auto* est = app.add_subcommand("estimate", "select, triangulate, refine and evaluate");
  auto* abl = app.add_subcommand("ablate", "iteration and confidence-input ablation");
  auto* ev = app.add_subcommand("eval", "metrics of a depth map against ground truth");
  for (auto* s : {synth, select, tri, ref, est, abl, ev}) common(s);
  for (auto* s : {select, tri, est, abl}) with_frames(s);
  ev->add_option("--pred", o.pred, "predicted depth PFM");
  ev->add_option("--sigma", o.sigma, "uncertainty PFM");
  ev->add_option("--gt", o.gt, "ground-truth depth PFM");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    const RunConfig cfg = build_run_config(o);
    if (synth->parsed()) {
      const auto m = cmd_synth(cfg);
      out << "wrote " << m.artifacts.size() << " artifacts\n";
    } else if (select->parsed()) {
      const auto kfs = resolve_keyframes(cfg);
      if (kfs.size() != 1) throw ConfigError("select takes exactly one keyframe");
      const Selection s = cmd_select(cfg, kfs.front());
      if (s.shortfall) err << "warning: selection shortfall, " << s.indices.size() << " frames found\n";
      out << format_selection(s);
    } else if (tri->parsed()) {
      for (const auto& t : cmd_triangulate(cfg)) {
        for (const auto& w : t.warnings) err << "warning: " << w << "\n";
        out << "keyframe " << t.keyframe << ": " << t.initial.valid_count() << " valid pixels\n";
      }
    } else if (ref->parsed()) {
      for (const auto& r : cmd_refine(cfg)) out << "objective " << detail::fmt(r.objective.back()) << "\n";
    } else if (est->parsed()) {
      for (const auto& e : cmd_estimate(cfg)) {
        for (const auto& w : e.warnings) err << "warning: " << w << "\n";
        out << format_estimate_report(e);
      }
    } else if (abl->parsed()) {
      out << format_ablation_csv(cmd_ablate(cfg));
    } else if (ev->parsed()) {
      out << cmd_eval(cfg).text;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitOk;
}

}  // namespace triad
