#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rsevi/reconstruction.hpp"
#include "rsevi/scene.hpp"
#include "test_util.hpp"

using namespace rsevi;

namespace {

SyntheticPair translation_pair(double vx, double vy, std::uint64_t seed = 1) {
  SyntheticPairSpec spec;
  spec.vx_px_per_frame = vx;
  spec.vy_px_per_frame = vy;
  spec.seed = seed;
  return make_synthetic_pair(spec);
}

FlowMap constant_flow(int h, int w, double dx, double dy) {
  FlowMap f(h, w);
  for (double& v : f.dx) v = dx;
  for (double& v : f.dy) v = dy;
  return f;
}

}  // namespace

TEST(ContractFlow, ZeroMapGivesZeroFlow) {
  DisplacementField d(TimeBins(0, 1, 2), 3, 2);
  for (double& v : d.values) v = 1.7;
  const FlowMap f = contract_flow(d, WeightMap(2, 3, 2));
  for (double v : f.dx) EXPECT_EQ(v, 0.0);
  for (double v : f.dy) EXPECT_EQ(v, 0.0);
}

TEST(ContractFlow, RowWeightsSelectBins) {
  const TimeBins bins(0, 1, 2);
  DisplacementField d(bins, 3, 2);
  for (int i = 0; i < 2; ++i)
    for (int y = 0; y < 3; ++y)
      for (int x = 0; x < 2; ++x) d.at(0, i, y, x) = 1.0;
  const WeightMap m = weight_map_analytic(ExposureModel::rolling(0, 1, 3), ExposureModel::global(0.5, 3), bins, 2);
  const FlowMap f = contract_flow(d, m);
  EXPECT_DOUBLE_EQ(f.dx[0], -1.0);
  EXPECT_DOUBLE_EQ(f.dy[0], 0.0);
  EXPECT_DOUBLE_EQ(f.dx[2], 0.0);
  EXPECT_DOUBLE_EQ(f.dx[4], 1.0);
}

TEST(RsToGs, StaticSceneReturnsSources) {
  std::mt19937_64 rng(41);
  const auto ctx = test::static_context(test::random_frame(8, 9, rng));
  const GsCandidates c = rs_to_gs(ctx, 0.9);
  EXPECT_EQ(c.from_r0.data, ctx.rs0.data);
  EXPECT_EQ(c.from_r1.data, ctx.rs1.data);
}

TEST(RsToGs, RowAtTargetTimeIsUnchanged) {
  const auto pair = translation_pair(3, 1);
  const auto ctx = test::oracle_context(pair);
  const int h = 20;
  const GsCandidates c = rs_to_gs(ctx, row_exposure_time(ctx.exposure0(), h));
  for (int x = 0; x < ctx.rs0.width; ++x) EXPECT_EQ(c.from_r0.at(h, x), ctx.rs0.at(h, x));
}

TEST(RsToGs, OracleCandidatesMatchGroundTruth) {
  const auto pair = translation_pair(3, 1);
  const auto ctx = test::oracle_context(pair);
  const auto interior = test::interior_mask(64, 64, 8);
  for (double t : interpolation_times(ctx, 4)) {
    const GsCandidates c = rs_to_gs(ctx, t);
    const Frame gt = pair.scene.render(t);
    ValidityMask m0 = interior, m1 = interior;
    for (std::size_t i = 0; i < m0.values.size(); ++i) {
      m0.values[i] &= c.mask0.values[i];
      m1.values[i] &= c.mask1.values[i];
    }
    EXPECT_GE(psnr_masked(c.from_r0, gt, m0), 35.0) << "t=" << t;
    EXPECT_GE(psnr_masked(c.from_r1, gt, m1), 35.0) << "t=" << t;
  }
}

TEST(Occlusion, SymmetricCaseIsHalf) {
  const FlowMap z(4, 4);
  const ValidityMask ones(4, 4, 1);
  const auto o = estimate_occlusion(z, z, z, z, ones, ones);
  for (double v : o.values) EXPECT_NEAR(v, 0.5, 1e-6);
}

TEST(Occlusion, BothInvalidIsExactlyHalf) {
  const FlowMap z(3, 3);
  const ValidityMask zeros(3, 3, 0);
  for (double v : estimate_occlusion(z, z, z, z, zeros, zeros).values) EXPECT_EQ(v, 0.5);
}

TEST(Occlusion, InvalidFirstCandidateGetsNoWeight) {
  const FlowMap z(4, 4);
  const auto o = estimate_occlusion(z, z, z, z, ValidityMask(4, 4, 0), ValidityMask(4, 4, 1));
  for (double v : o.values) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Occlusion, SoftminOfConsistencyErrors) {
  const FlowMap z(4, 4);
  const FlowMap off = constant_flow(4, 4, 2.0, 0.0);
  const ValidityMask ones(4, 4, 1);
  const auto o = estimate_occlusion(z, z, off, z, ones, ones);
  const double oracle = 1.0 / (1.0 + std::exp(-2.0) + 1e-6);
  for (double v : o.values) {
    EXPECT_NEAR(v, oracle, 1e-12);
    EXPECT_NEAR(v, 0.8808, 1e-4);
  }
}

TEST(Fuse, ConvexCombination) {
  const Frame c0(3, 3, 1, 0.0), c1(3, 3, 1, 1.0);
  const Frame out = fuse_gs(c0, c1, OcclusionMap(3, 3, 0.25));
  for (double v : out.data) EXPECT_DOUBLE_EQ(v, 0.75);
  EXPECT_EQ(fuse_gs(c0, c1, OcclusionMap(3, 3, 1.0)).data, c0.data);
}

TEST(Fuse, EqualCandidatesIgnoreWeights) {
  std::mt19937_64 rng(42);
  const Frame c = test::random_frame(4, 4, rng);
  Plane o(4, 4);
  std::uniform_real_distribution<double> u(0, 1);
  for (double& v : o.values) v = u(rng);
  EXPECT_EQ(fuse_gs(c, c, o).data, c.data);
}

TEST(GsToRs, ZeroFieldIsIdentity) {
  std::mt19937_64 rng(43);
  const auto ctx = test::static_context(test::random_frame(8, 8, rng));
  Frame g = test::random_frame(8, 8, rng);
  g.timestamp = 1.2;
  EXPECT_EQ(gs_to_rs(g, ctx, RsTarget::kR0).image.data, g.data);
  EXPECT_EQ(gs_to_rs(g, ctx, RsTarget::kR1).image.data, g.data);
}

TEST(GsToRs, OracleRoundTrip) {
  const auto pair = translation_pair(4, -2);
  const auto ctx = test::oracle_context(pair);
  const auto interior = test::interior_mask(64, 64, 8);
  for (double t : interpolation_times(ctx, 4)) {
    Frame g = synthesize_gs(ctx, t).image;
    g.timestamp = t;
    for (RsTarget target : {RsTarget::kR0, RsTarget::kR1}) {
      const WarpResult back = gs_to_rs(g, ctx, target);
      const Frame& ref = target == RsTarget::kR0 ? ctx.rs0 : ctx.rs1;
      ValidityMask m = interior;
      for (std::size_t i = 0; i < m.values.size(); ++i) m.values[i] &= back.mask.values[i];
      EXPECT_GE(psnr_masked(back.image, ref, m), 35.0) << "t=" << t;
    }
  }
}

TEST(RsToRs, StaticSceneIsIdentity) {
  std::mt19937_64 rng(44);
  const auto ctx = test::static_context(test::random_frame(8, 8, rng));
  EXPECT_EQ(rs_to_rs(ctx, RsDirection::kR1ToR0).image.data, ctx.rs1.data);
  EXPECT_EQ(rs_to_rs(ctx, RsDirection::kR0ToR1).image.data, ctx.rs0.data);
}

TEST(RsToRs, OracleFieldAlignsFrames) {
  const auto pair = translation_pair(3, 1);
  const auto ctx = test::oracle_context(pair);
  const auto interior = test::interior_mask(64, 64, 8);
  const WarpResult a = rs_to_rs(ctx, RsDirection::kR1ToR0);
  const WarpResult b = rs_to_rs(ctx, RsDirection::kR0ToR1);
  EXPECT_GE(psnr_masked(a.image, ctx.rs0, interior), 30.0);
  EXPECT_GE(psnr_masked(b.image, ctx.rs1, interior), 30.0);
}

TEST(PairGeometry, ReverseMapIsNegation) {
  const auto pair = translation_pair(2, 0);
  const auto ctx = test::oracle_context(pair);
  const PairGeometry g = pair_geometry(ctx);
  EXPECT_EQ(g.r0_to_r1.weights, negate(g.r1_to_r0).weights);
}

TEST(Interpolate, StaticSceneRepeatsFrame) {
  std::mt19937_64 rng(45);
  const auto ctx = test::static_context(test::random_frame(8, 8, rng));
  const auto seq = interpolate_sequence(ctx, 3);
  ASSERT_EQ(seq.size(), 3u);
  for (const auto& f : seq) EXPECT_EQ(f.image.data, ctx.rs0.data);
}

TEST(Interpolate, TwoFramesSitAtMidRows) {
  std::mt19937_64 rng(46);
  const auto ctx = test::static_context(test::random_frame(8, 8, rng));
  const auto t = interpolation_times(ctx, 2);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_DOUBLE_EQ(t[0], mid_exposure_time(ctx.exposure0()));
  EXPECT_DOUBLE_EQ(t[1], mid_exposure_time(ctx.exposure1()));
  EXPECT_DOUBLE_EQ(t[0], 0.5);
  EXPECT_DOUBLE_EQ(t[1], 1.5);
}

TEST(Interpolate, OracleFieldFourFrames) {
  const auto pair = translation_pair(3, 1);
  const auto ctx = test::oracle_context(pair);
  const auto interior = test::interior_mask(64, 64, 8);
  const auto times = interpolation_times(ctx, 4);
  const auto seq = interpolate_sequence(ctx, 4);
  double mean = 0.0;
  for (std::size_t j = 0; j < seq.size(); ++j)
    mean += psnr_masked(seq[j].image, pair.scene.render(times[j]), interior) / seq.size();
  EXPECT_GE(mean, 33.0);
}
