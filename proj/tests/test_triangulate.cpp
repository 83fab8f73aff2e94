#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "triad/synth.hpp"
#include "triad/triangulate.hpp"

using namespace triad;

namespace {

struct Instance {
  Vec3 m;
  std::vector<Observation> obs;
  std::vector<oracle::View> views;
  double depth;
};

// A random point seen from n random poses, with observation rays optionally
// perturbed so the residual is nonzero.
Instance random_instance(std::mt19937_64& rng, int n, double noise) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  Instance inst;
  inst.m = Vec3(0.5 * u(rng), 0.4 * u(rng), 1.0);
  inst.depth = 1.0 + 4.0 * (0.5 + 0.5 * u(rng));
  for (int k = 0; k < n; ++k) {
    const RelativePose pose{axis_angle(Vec3(u(rng), u(rng), u(rng)), 0.1 * u(rng)),
                            Vec3(0.3 * u(rng), 0.3 * u(rng), 0.1 * u(rng))};
    Vec3 s = pose.apply(inst.m * inst.depth);
    s += noise * s.norm() * Vec3(g(rng), g(rng), g(rng));
    inst.obs.push_back({Ray(s), pose});
    inst.views.push_back({s, pose.rotation, pose.translation});
  }
  return inst;
}

}  // namespace

TEST(TriangulatePixel, TwoViewTextbookCase) {
  const std::vector<Observation> obs{{Ray(Vec3(-0.5, 0.0, 1.0)), {Mat3::Identity(), Vec3(-1.0, 0.0, 0.0)}}};
  const auto r = triangulate_pixel(Vec3(0, 0, 1), obs);
  ASSERT_TRUE(r);
  EXPECT_NEAR(r->depth, 2.0, 1e-15);
  EXPECT_NEAR(r->residual, 0.0, 1e-15);
}

TEST(TriangulatePixel, ZeroBaselineIsDegenerate) {
  const std::vector<Observation> obs{{Ray(Vec3(0, 0, 1)), RelativePose::identity()}};
  EXPECT_FALSE(triangulate_pixel(Vec3(0, 0, 1), obs));
}

TEST(TriangulatePixel, NegativeAndFarDepthsAreDegenerate) {
  // Ray converging behind the keyframe.
  const std::vector<Observation> behind{{Ray(Vec3(0.5, 0.0, 1.0)), {Mat3::Identity(), Vec3(-1.0, 0.0, 0.0)}}};
  EXPECT_FALSE(triangulate_pixel(Vec3(0, 0, 1), behind));
  const std::vector<Observation> far{{Ray(Vec3(-0.001, 0.0, 1.0)), {Mat3::Identity(), Vec3(-1.0, 0.0, 0.0)}}};
  EXPECT_FALSE(triangulate_pixel(Vec3(0, 0, 1), far));
  TriangulationOptions opts;
  opts.max_depth = 2000.0;
  EXPECT_TRUE(triangulate_pixel(Vec3(0, 0, 1), far, opts));
}

TEST(TriangulatePixel, MatchesGoldenSectionSearch) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 300; ++i) {
    const Instance inst = random_instance(rng, 2 + i % 5, 0.002);
    const auto r = triangulate_pixel(inst.m, inst.obs);
    if (!r) continue;
    const double search = oracle::golden_section_min(
        [&](double d) { return oracle::triangulation_cost(inst.m, inst.views, d); }, 1e-9, 100.0);
    EXPECT_NEAR(r->depth, search, 1e-6 * r->depth);
    EXPECT_NEAR(r->residual * r->residual, oracle::triangulation_cost(inst.m, inst.views, r->depth), 1e-12);
  }
}

TEST(TriangulatePixel, ExactCorrespondencesGiveZeroResidual) {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 100; ++i) {
    const Instance inst = random_instance(rng, 3, 0.0);
    const auto r = triangulate_pixel(inst.m, inst.obs);
    ASSERT_TRUE(r);
    EXPECT_NEAR(r->depth, inst.depth, 1e-10 * inst.depth);
    EXPECT_LE(r->residual, 1e-10);
  }
}

TEST(TriangulatePixel, TranslationScaleEquivariance) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 100; ++i) {
    Instance inst = random_instance(rng, 4, 0.003);
    const auto base = triangulate_pixel(inst.m, inst.obs);
    if (!base) continue;
    const double s = 0.5 + 3.0 * (i % 7) / 7.0;
    std::vector<Observation> scaled;
    for (const auto& o : inst.obs) scaled.push_back({o.ray, {o.pose.rotation, s * o.pose.translation}});
    TriangulationOptions opts;
    opts.max_depth = 1e6;
    const auto r = triangulate_pixel(inst.m, scaled, opts);
    ASSERT_TRUE(r);
    EXPECT_NEAR(r->depth, s * base->depth, 1e-12 * s * base->depth);
    EXPECT_NEAR(r->residual, s * base->residual, 1e-12 * s * base->depth);
    EXPECT_EQ(r->hessian, base->hessian);
  }
}

TEST(TriangulatePixel, MoreObservationsNeverReduceHessian) {
  std::mt19937_64 rng(24);
  for (int i = 0; i < 50; ++i) {
    const Instance inst = random_instance(rng, 6, 0.0);
    double last = 0.0;
    for (std::size_t n = 1; n <= inst.obs.size(); ++n) {
      TriangulationOptions opts;
      opts.hessian_epsilon = 0.0;
      const auto r = triangulate_pixel(inst.m, std::span(inst.obs).first(n), opts);
      if (!r) continue;
      EXPECT_GE(r->hessian, last);
      last = r->hessian;
    }
  }
}

TEST(TriangulateMap, InvalidFlowAndIdentityPoseGiveInvalidPixels) {
  const Intrinsics K{40.0, 40.0, 15.5, 11.5, 32, 24};
  FlowField dead(32, 24);
  for (int y = 0; y < 24; ++y)
    for (int x = 0; x < 32; ++x) dead.invalidate(x, y);
  TriangulationInput a{K, {{dead, {Mat3::Identity(), Vec3(0.1, 0, 0)}}}};
  EXPECT_EQ(triangulate_map(a).valid_count(), 0u);
  TriangulationInput b{K, {{FlowField(32, 24), RelativePose::identity()}}};
  const InitialDepth init = triangulate_map(b);
  EXPECT_EQ(init.valid_count(), 0u);
  EXPECT_TRUE(std::isnan(init.depth(3, 3)));
  EXPECT_TRUE(std::isnan(init.conf_h(3, 3)));
  EXPECT_TRUE(std::isnan(init.conf_r(3, 3)));
}

TEST(TriangulateMap, RejectsEmptyAndMismatchedInput) {
  const Intrinsics K{40.0, 40.0, 15.5, 11.5, 32, 24};
  EXPECT_THROW(triangulate_map(TriangulationInput{K, {}}), InputError);
  TriangulationInput bad{K, {{FlowField(31, 24), RelativePose::identity()}}};
  EXPECT_THROW(triangulate_map(bad), InputError);
}

TEST(TriangulateMap, DropsOnlyTheInvalidObservation) {
  const Intrinsics K{100.0, 100.0, 31.5, 23.5, 64, 48};
  SceneParams sp;
  sp.width = 64;
  sp.height = 48;
  const auto scene = SyntheticScene::generate(sp);
  const RelativePose p1{Mat3::Identity(), Vec3(-0.05, 0, 0)}, p2{Mat3::Identity(), Vec3(0.05, 0.02, 0)};
  FlowField f1 = render_flow(scene, K, p1), f2 = render_flow(scene, K, p2);
  f1.invalidate(30, 20);
  const InitialDepth init = triangulate_map({K, {{f1, p1}, {f2, p2}}});
  ASSERT_TRUE(init.valid(30, 20));
  EXPECT_NEAR(init.depth(30, 20), scene.depth(30, 20), 1e-5);
  EXPECT_LT(init.conf_h(30, 20), init.conf_h(31, 20));
}

TEST(TriangulateMap, BitIdenticalAcrossWorkerCounts) {
  const Intrinsics K{100.0, 100.0, 39.5, 29.5, 80, 60};
  SceneParams sp;
  sp.width = 80;
  sp.height = 60;
  const auto scene = SyntheticScene::generate(sp);
  const RelativePose p{axis_angle(Vec3::UnitY(), 0.01), Vec3(0.08, 0, 0)};
  const FlowField f = corrupt_flow(render_flow(scene, K, p), NoiseModel{0.7, 0.02, 10.0, 3});
  TriangulationOptions one, many;
  many.workers = 5;
  const auto a = triangulate_map({K, {{f, p}}}, one), b = triangulate_map({K, {{f, p}}}, many);
  EXPECT_EQ(std::memcmp(a.depth.data().data(), b.depth.data().data(), a.depth.data().size_bytes()), 0);
  EXPECT_EQ(std::memcmp(a.conf_r.data().data(), b.conf_r.data().data(), a.conf_r.data().size_bytes()), 0);
  EXPECT_EQ(a.valid, b.valid);
}

TEST(InitialDepth, FromRastersRebuildsMask) {
  Raster<1> d(2, 1, 1.0f), h(2, 1, 1.0f), r(2, 1, 0.0f);
  d(1, 0) = std::numeric_limits<float>::quiet_NaN();
  const auto init = InitialDepth::from_rasters(d, h, r);
  EXPECT_EQ(init.valid_count(), 1u);
  EXPECT_TRUE(std::isnan(init.conf_h(1, 0)));
}

TEST(EpipolarLoss, ExactFlowGivesZero) {
  SceneParams sp;
  sp.width = 64;
  sp.height = 48;
  const auto scene = SyntheticScene::generate(sp);
  const Intrinsics K{60.0, 60.0, 31.5, 23.5, 64, 48};
  const RelativePose p{axis_angle(Vec3(0, 1, 0.2), 0.02), Vec3(0.1, 0.01, 0.0)};
  const auto loss = epipolar_loss(render_flow(scene, K, p), p, scene.depth_map(), K);
  EXPECT_LT(loss.total, 1e-12 * 64 * 48);
}

TEST(EpipolarLoss, PerturbedFlowMatchesDirectRecomputation) {
  SceneParams sp;
  sp.width = 48;
  sp.height = 32;
  const auto scene = SyntheticScene::generate(sp);
  const Intrinsics K{50.0, 50.0, 23.5, 15.5, 48, 32};
  const RelativePose p{axis_angle(Vec3(1, 0, 0), 0.01), Vec3(0.1, 0.0, 0.01)};
  const FlowField f = corrupt_flow(render_flow(scene, K, p), NoiseModel{1.0, 0.05, 5.0, 4});
  const Raster<1> gt = scene.depth_map();
  const auto loss = epipolar_loss(f, p, gt, K);
  double expected = 0.0;
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 48; ++x) {
      if (!f.is_valid(x, y)) continue;
      const Eigen::Vector3d m((x - K.cx) / K.fx, (y - K.cy) / K.fy, 1.0);
      const Eigen::Vector3d s((x + double(f.flow(x, y, 0)) - K.cx) / K.fx, (y + double(f.flow(x, y, 1)) - K.cy) / K.fy, 1.0);
      expected += oracle::triangulation_cost(m, {{s, p.rotation, p.translation}}, gt(x, y));
    }
  }
  EXPECT_NEAR(loss.total, expected, 1e-12 * std::max(1.0, expected));
  EXPECT_GT(loss.total, 0.0);
  for (float v : loss.per_pixel.data()) {
    if (std::isfinite(v)) EXPECT_GE(v, 0.0f);
  }
}
