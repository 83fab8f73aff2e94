#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <sstream>

#include "oracles.hpp"
#include "triad/cli.hpp"

using namespace triad;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// A small bundle so pipeline tests stay quick.
RunConfig small_config(const std::filesystem::path& root) {
  RunConfig cfg;
  cfg.root = root;
  cfg.scene.width = 96;
  cfg.scene.height = 72;
  cfg.motion.frames = 12;
  cfg.motion.velocity = Vec3(0.05, 0.0, 0.0);
  cfg.selection.fixed_step = 2;
  cfg.keyframes = {6};
  return cfg;
}

int cli(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
  args.insert(args.begin(), "triad");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int rc = run_cli(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return rc;
}

std::map<std::string, std::string> read_kv(const std::filesystem::path& p) {
  std::map<std::string, std::string> kv;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

}  // namespace

TEST(Config, ParsesFileWithCommentsAndRejectsUnknownKeys) {
  oracle::TempDir dir("cfg");
  std::ofstream(dir.path() / "a.conf") << "# comment\nmu = 0.5\n\nselect_mode = adaptive  # trailing\nkeyframe = 3,7\n";
  RunConfig cfg;
  apply_config_file(cfg, dir.path() / "a.conf");
  EXPECT_EQ(cfg.refine.mu, 0.5);
  EXPECT_EQ(cfg.selection.mode, SelectionMode::kAdaptive);
  EXPECT_EQ(cfg.keyframes, (std::vector<std::size_t>{3, 7}));
  std::ofstream(dir.path() / "b.conf") << "nonsense = 1\n";
  EXPECT_THROW(apply_config_file(cfg, dir.path() / "b.conf"), ConfigError);
  std::ofstream(dir.path() / "c.conf") << "mu = fast\n";
  EXPECT_THROW(apply_config_file(cfg, dir.path() / "c.conf"), ConfigError);
  EXPECT_THROW(apply_config_file(cfg, dir.path() / "missing.conf"), ConfigError);
}

TEST(Config, EnvironmentOverridesFileAndFlagsOverrideEnvironment) {
  oracle::TempDir dir("cfg");
  std::ofstream(dir.path() / "a.conf") << "mu = 0.5\nkappa = 0.2\n";
  RunConfig cfg;
  apply_config_file(cfg, dir.path() / "a.conf");
  apply_environment(cfg, [](const char* name) -> const char* {
    return std::string(name) == "TRIAD_MU" ? "0.25" : nullptr;
  });
  EXPECT_EQ(cfg.refine.mu, 0.25);
  EXPECT_EQ(cfg.refine.kappa, 0.2);
  apply_setting(cfg, "mu", "2");
  EXPECT_EQ(cfg.refine.mu, 2.0);
}

TEST(Config, EveryKeyAcceptsARepresentativeValue) {
  for (const auto& key : config_keys()) {
    EXPECT_FALSE(key.empty());
    EXPECT_EQ(key.find(' '), std::string::npos);
  }
  EXPECT_GT(config_keys().size(), 40u);
}

TEST(Synth, BundleIsByteIdenticalAcrossRunsAndWorkerCounts) {
  oracle::TempDir a("synth"), b("synth");
  RunConfig ca = small_config(a.path()), cb = small_config(b.path());
  ca.noise = {1.0, 0.03, 20.0, 0};
  cb.noise = ca.noise;
  cb.workers = 4;
  const Manifest ma = cmd_synth(ca);
  cmd_synth(cb);
  for (const auto& art : ma.artifacts) EXPECT_EQ(slurp(a.path() / art.path), slurp(b.path() / art.path)) << art.path;
  EXPECT_EQ(slurp(a.path() / kManifestName), slurp(b.path() / kManifestName));
}

TEST(Synth, ManifestCountsEveryArtifact) {
  oracle::TempDir dir("synth");
  const RunConfig cfg = small_config(dir.path());
  const Manifest m = cmd_synth(cfg);
  EXPECT_EQ(m.artifacts.size(), 2u * (12 - 1) + 1 + 1 + 2);
  for (const auto& art : m.artifacts) EXPECT_TRUE(std::filesystem::exists(dir.path() / art.path)) << art.path;
  const Manifest back = Manifest::read(dir.path() / kManifestName);
  EXPECT_EQ(back.artifacts.size(), m.artifacts.size());
  EXPECT_EQ(back.keyframes, m.keyframes);
  EXPECT_EQ(back.seed, m.seed);
}

TEST(Synth, ZeroNoiseMakesNoisyFlowEqualExact) {
  oracle::TempDir dir("synth");
  cmd_synth(small_config(dir.path()));
  for (std::size_t j : {0u, 3u, 11u}) {
    EXPECT_EQ(slurp(dir.path() / "flow" / flow_name("exact", 6, j)), slurp(dir.path() / "flow" / flow_name("noisy", 6, j)));
  }
}

TEST(Estimate, NoiseFreeBundleIsExactAndWritesEveryOutput) {
  oracle::TempDir dir("est");
  RunConfig cfg = small_config(dir.path());
  cmd_synth(cfg);
  const auto results = cmd_estimate(cfg);
  ASSERT_EQ(results.size(), 1u);
  const auto& est = results[0];
  EXPECT_EQ(est.selection.indices, (std::vector<std::size_t>{2, 4, 8, 10}));
  ASSERT_TRUE(est.initial_metrics && est.refined_metrics);
  EXPECT_LT(est.initial_metrics->rmse, 1e-6 * 2.0);
  const auto out = dir.path() / "out";
  for (const char* f : {"initial_depth.pfm", "conf_h.pfm", "conf_r.pfm", "refined_depth.pfm", "uncertainty.pfm",
                        "objective.log", "report.txt", "report.kv", "sweep.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(out / f)) << f;
  }
  const std::string report = slurp(out / "report.txt");
  EXPECT_NE(report.find("[initial]"), std::string::npos);
  EXPECT_NE(report.find("[refined]"), std::string::npos);
  std::istringstream log(slurp(out / "objective.log"));
  int k = -1, lines = 0;
  double c = 0.0;
  while (log >> k >> c) EXPECT_EQ(k, lines++);
  EXPECT_EQ(lines, cfg.refine.iterations + 1);
  // Output rasters read back to what was computed.
  EXPECT_EQ(read_pfm<1>(out / "refined_depth.pfm"), to_raster(est.refined.refined()));
}

TEST(Estimate, ShortfallIsAWarningAndZeroFramesIsAnError) {
  oracle::TempDir dir("est");
  RunConfig cfg = small_config(dir.path());
  cmd_synth(cfg);
  cfg.selection.fixed_step = 5;
  const auto est = cmd_estimate(cfg).front();
  EXPECT_TRUE(est.selection.shortfall);
  EXPECT_NE(slurp(dir.path() / "out" / "report.txt").find("warning: selection shortfall"), std::string::npos);
  EXPECT_EQ(read_kv(dir.path() / "out" / "report.kv").at("shortfall"), "1");
  cfg.selection.mode = SelectionMode::kAdaptive;
  cfg.selection.t_min = 10.0;
  cfg.selection.theta_min = 10.0;
  EXPECT_THROW(cmd_estimate(cfg), InputError);
}

TEST(Estimate, SeveralKeyframesGoToSeparateDirectoriesAndMatchSingleRuns) {
  oracle::TempDir dir("est");
  RunConfig cfg = small_config(dir.path());
  cfg.keyframes = {4, 7};
  cfg.noise = {0.5, 0.0, 20.0, 0};
  cfg.workers = 2;
  cmd_synth(cfg);
  cmd_estimate(cfg);
  RunConfig single = cfg;
  single.keyframes = {7};
  single.out_dir = "single";
  single.workers = 1;
  cmd_estimate(single);
  EXPECT_EQ(slurp(dir.path() / "out" / "kf_00007" / "refined_depth.pfm"),
            slurp(dir.path() / "single" / "refined_depth.pfm"));
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "out" / "kf_00004" / "report.txt"));
}

TEST(Estimate, AllDegenerateIsNumericalError) {
  oracle::TempDir dir("est");
  RunConfig cfg = small_config(dir.path());
  cfg.motion.velocity = Vec3::Zero();
  cmd_synth(cfg);
  EXPECT_THROW(cmd_estimate(cfg), NumericalError);
}

TEST(Stages, TriangulateThenRefineMatchesEstimate) {
  oracle::TempDir dir("stage");
  RunConfig cfg = small_config(dir.path());
  cfg.noise = {0.8, 0.02, 10.0, 0};
  cmd_synth(cfg);
  cmd_estimate(cfg);
  RunConfig staged = cfg;
  staged.out_dir = "staged";
  cmd_triangulate(staged);
  cmd_refine(staged);
  for (const char* f : {"initial_depth.pfm", "conf_h.pfm", "refined_depth.pfm", "uncertainty.pfm", "objective.log"}) {
    EXPECT_EQ(slurp(dir.path() / "out" / f), slurp(dir.path() / "staged" / f)) << f;
  }
}

TEST(Ablate, RowsCoverIterationGridAndConfidenceVariants) {
  oracle::TempDir dir("abl");
  RunConfig cfg = small_config(dir.path());
  cfg.noise = {0.0, 0.0, 20.0, 0};
  cmd_synth(cfg);
  const auto rows = cmd_ablate(cfg);
  ASSERT_EQ(rows.size(), 1u + 6u + 4u);
  EXPECT_EQ(rows[0].study, "initial");
  const int grid[] = {0, 1, 3, 5, 7, 9};
  for (int i = 0; i < 6; ++i) EXPECT_EQ(rows[1 + i].iterations, grid[i]);
  // Every pixel is valid in this bundle, so zero iterations is the initial map.
  EXPECT_EQ(rows[0].metrics.n_evaluated, rows[1].metrics.n_evaluated);
  EXPECT_NEAR(rows[1].metrics.rmse, rows[0].metrics.rmse, 1e-15);
  EXPECT_EQ(rows[7].confidence, ConfidenceInputs::kDepthOnly);
  EXPECT_EQ(rows[10].confidence, ConfidenceInputs::kFull);
  const std::string csv = slurp(dir.path() / "out" / "ablation.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 12);
}

TEST(Eval, ReportsMetricsForGivenMaps) {
  oracle::TempDir dir("eval");
  RunConfig cfg = small_config(dir.path());
  cmd_synth(cfg);
  cmd_estimate(cfg);
  cfg.pred = "out/refined_depth.pfm";
  cfg.sigma = "out/uncertainty.pfm";
  cfg.gt = "depth/gt_00006.pfm";
  const auto r = cmd_eval(cfg);
  EXPECT_NE(r.text.find("[eval]"), std::string::npos);
  EXPECT_TRUE(r.correlation.has_value());
  EXPECT_EQ(r.sweep.size(), 4u);
}

TEST(Cli, SubcommandsAndExitCodes) {
  oracle::TempDir dir("cli");
  const std::string root = dir.path().string();
  const std::vector<std::string> small{"--set", "width=64", "--set", "height=48", "--set", "sequence_length=12",
                                       "--set", "keyframe=6", "--set", "velocity=0.05,0,0"};
  auto with = [&](std::vector<std::string> head, const std::vector<std::string>& tail = {}) {
    head.insert(head.end(), small.begin(), small.end());
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  };
  EXPECT_EQ(cli(with({"synth", "--root", root})), 0);
  std::string out, err;
  EXPECT_EQ(cli(with({"select", "--root", root, "--set", "fixed_step=2"}), &out), 0);
  EXPECT_EQ(out, "2\n4\n8\n10\n");
  EXPECT_EQ(cli(with({"select", "--root", root}), &out, &err), 0);
  EXPECT_EQ(out, "1\n11\n");
  EXPECT_NE(err.find("shortfall"), std::string::npos);
  EXPECT_EQ(cli(with({"estimate", "--root", root, "--set", "fixed_step=2"}), &out), 0);
  EXPECT_NE(out.find("[refined]"), std::string::npos);
  EXPECT_EQ(cli({"eval", "--root", root, "--pred", "out/refined_depth.pfm", "--gt", "depth/gt_00006.pfm"}, &out), 0);

  EXPECT_EQ(cli({"estimate"}), 1);
  EXPECT_EQ(cli({"frobnicate", "--root", root}), 1);
  EXPECT_EQ(cli({"estimate", "--root", root, "--set", "mu=abc"}), 1);
  EXPECT_EQ(cli({"estimate", "--root", root, "--set", "omega=2"}), 1);
  EXPECT_EQ(cli({"estimate", "--root", (dir.path() / "nowhere").string(), "--keyframe", "1"}), 2);
  std::ofstream(dir.path() / "flow" / flow_name("noisy", 6, 4), std::ios::trunc) << "junk";
  EXPECT_EQ(cli(with({"estimate", "--root", root, "--set", "fixed_step=2"})), 2);
  EXPECT_EQ(cli(with({"synth", "--root", root}, {"--set", "velocity=0,0,0"})), 0);
  EXPECT_EQ(cli(with({"estimate", "--root", root, "--set", "fixed_step=2"}, {"--set", "velocity=0,0,0"})), 3);
}
