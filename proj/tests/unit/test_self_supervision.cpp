#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rsevi/self_supervision.hpp"
#include "test_util.hpp"

using namespace rsevi;

namespace {

constexpr double kEps = kDefaultCharbonnierEps;

SyntheticPair translation_pair(double vx, double vy) {
  SyntheticPairSpec spec;
  spec.vx_px_per_frame = vx;
  spec.vy_px_per_frame = vy;
  return make_synthetic_pair(spec);
}

}  // namespace

TEST(Losses, StaticSceneFloors) {
  std::mt19937_64 rng(51);
  const auto ctx = test::static_context(test::random_frame(8, 8, rng));
  const auto times = interpolation_times(ctx, 4);
  std::vector<OcclusionMap> occ;
  for (double t : times) occ.push_back(synthesize_gs(ctx, t).occlusion);
  EXPECT_NEAR(loss_gs2rs(ctx, times, occ), kEps, 1e-15);
  EXPECT_NEAR(loss_rs2rs(ctx), 2 * kEps, 1e-15);
  const LossBreakdown b = total_loss(ctx, {1, 1, 1}, times);
  EXPECT_EQ(b.field, 0.0);
  EXPECT_NEAR(b.total, 3 * kEps, 1e-15);
  EXPECT_EQ(total_loss(ctx, {0, 0, 0}, times).total, 0.0);
}

TEST(Losses, TotalIsWeightedSumOfTerms) {
  std::mt19937_64 rng(52);
  const auto ctx = test::random_instance(8, 2, rng);
  const auto times = interpolation_times(ctx, 4);
  const LossWeights w{0.3, 0.7, 1.9};
  const LossBreakdown b = total_loss(ctx, w, times);
  EXPECT_NEAR(b.total, w.lambda_f * b.field + w.lambda_rs * b.rs2rs + w.lambda_gs * b.gs2rs, 1e-14);
  EXPECT_NEAR(b.field, smoothness_loss(ctx.field), 1e-15);
  EXPECT_NEAR(b.rs2rs, loss_rs2rs(ctx), 1e-15);
  const LossBreakdown doubled = total_loss(ctx, {0.6, 1.4, 3.8}, times);
  EXPECT_NEAR(doubled.total, 2 * b.total, 1e-13);
}

TEST(Losses, OracleFieldNearFloorsOnSlowScene) {
  const auto pair = translation_pair(2, 0);
  const auto ctx = test::oracle_context(pair);
  const auto times = interpolation_times(ctx, 4);
  const LossBreakdown b = total_loss(ctx, {}, times);
  // Regression values measured on this scene over all valid pixels:
  // gs2rs 3.30 eps, rs2rs 2.00 eps.
  EXPECT_LE(b.gs2rs, 3.5 * kEps);
  EXPECT_LE(b.rs2rs, 4 * kEps);
}

TEST(Gradient, ZeroOnStaticScene) {
  std::mt19937_64 rng(53);
  const auto ctx = test::static_context(test::random_frame(8, 8, rng));
  for (double g : grad_total_loss(ctx, {1, 1, 1}, interpolation_times(ctx, 4))) EXPECT_EQ(g, 0.0);
}

TEST(Gradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(54);
  for (int trial = 0; trial < 3; ++trial) {
    const auto ctx = test::random_instance(8, 2, rng);
    const auto r = test::check_gradient(ctx, {1, 1, 1}, interpolation_times(ctx, 4), 1e-4);
    EXPECT_LE(r.max_rel_error, 1e-3);
    EXPECT_GT(r.compared, r.skipped);
  }
}

TEST(Gradient, WrapperAgreesWithObjective) {
  std::mt19937_64 rng(55);
  const auto ctx = test::random_instance(8, 2, rng);
  const auto times = interpolation_times(ctx, 4);
  const SelfSupervisedObjective obj(ctx, {}, times);
  std::vector<double> g;
  obj.gradient(ctx.field, g);
  EXPECT_EQ(g, grad_total_loss(ctx, {}, times));
  EXPECT_EQ(obj.evaluate(ctx.field).total, total_loss(ctx, {}, times).total);
}

TEST(Optimizer, StaticSceneConvergesImmediately) {
  std::mt19937_64 rng(56);
  const auto ctx = test::static_context(test::random_frame(8, 8, rng));
  const auto r = optimize_field(ctx, ctx.field, {}, {});
  EXPECT_GE(r.trace.size(), 1u);
  EXPECT_LE(r.trace.size(), 2u);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.field.values, ctx.field.values);
}

TEST(Optimizer, TraceIsMonotone) {
  std::mt19937_64 rng(57);
  const auto ctx = test::random_instance(8, 2, rng);
  OptimizerConfig cfg;
  cfg.max_iters = 30;
  const auto r = optimize_field(ctx, ctx.field, {}, cfg);
  ASSERT_GE(r.trace.size(), 2u);
  for (std::size_t i = 1; i < r.trace.size(); ++i)
    EXPECT_LE(r.trace[i].loss.total, r.trace[i - 1].loss.total);
}

TEST(Optimizer, ClassicalInitDoesNotGetWorse) {
  const auto pair = translation_pair(3, 1);
  const auto init = estimate_field_classical(voxelize(pair.events, pair.bins));
  FramePairContext ctx{pair.rs0, pair.rs1, init, {}};
  OptimizerConfig cfg;
  cfg.max_iters = 10;
  const auto r = optimize_field(ctx, init, {}, cfg);
  const auto times = interpolation_times(ctx, cfg.latent_count);
  const SelfSupervisedObjective obj(ctx, {}, times);
  EXPECT_LE(obj.evaluate(r.field).total, obj.evaluate(init).total);
  EXPECT_LE(r.trace.back().loss.total, r.trace.front().loss.total);
}

TEST(Optimizer, FiniteDifferenceModeDescends) {
  std::mt19937_64 rng(58);
  auto ctx = test::random_instance(6, 2, rng);
  OptimizerConfig cfg;
  cfg.max_iters = 3;
  cfg.gradient_mode = GradientMode::kFiniteDifference;
  const auto r = optimize_field(ctx, ctx.field, {}, cfg);
  EXPECT_LT(r.trace.back().loss.total, r.trace.front().loss.total);
}
