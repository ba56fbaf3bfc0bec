#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "rsevi/error.hpp"
#include "rsevi/exposure.hpp"

using namespace rsevi;

namespace {

// Signed overlap of [min(a,b), max(a,b)] with bin i, divided by the bin width.
double overlap_oracle(double t_dst, double t_src, const TimeBins& bins, int i) {
  const double lo = std::min(t_dst, t_src), hi = std::max(t_dst, t_src);
  const double a = bins.boundary(i), b = bins.boundary(i + 1);
  const double len = std::max(0.0, std::min(hi, b) - std::max(lo, a));
  return (t_src > t_dst ? 1.0 : -1.0) * len / (b - a);
}

double max_abs_diff(const WeightMap& a, const WeightMap& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.weights.size(); ++i)
    m = std::max(m, std::abs(a.weights[i] - b.weights[i]));
  return m;
}

}  // namespace

TEST(RowExposure, RollingShutterRows) {
  const auto rs = ExposureModel::rolling(0.0, 1.0, 3);
  EXPECT_DOUBLE_EQ(row_exposure_time(rs, 1), 0.5);
  EXPECT_DOUBLE_EQ(row_exposure_time(rs, 0), 0.0);
}

TEST(RowExposure, GlobalShutterIgnoresRow) {
  const auto gs = ExposureModel::global(0.25, 7);
  for (int h = 0; h < 7; ++h) EXPECT_DOUBLE_EQ(row_exposure_time(gs, h), 0.25);
}

TEST(RsFrameRate, Examples) {
  EXPECT_NEAR(rs_effective_frame_rate(120, 260), 120.0 / 260.0, 1e-15);
  EXPECT_NEAR(rs_effective_frame_rate(120, 260), 0.4615, 1e-4);
  EXPECT_DOUBLE_EQ(rs_effective_frame_rate(37, 37), 1.0);
  EXPECT_DOUBLE_EQ(rs_effective_frame_rate(2400, 480), 5.0);
}

TEST(WeightMapAnalytic, RollingToGlobalRows) {
  const auto src = ExposureModel::rolling(0.0, 1.0, 3);
  const auto dst = ExposureModel::global(0.5, 3);
  const WeightMap m = weight_map_analytic(src, dst, TimeBins(0.0, 1.0, 2), 2);
  for (int w = 0; w < 2; ++w) {
    EXPECT_DOUBLE_EQ(m.at(0, 0, w), -1.0);
    EXPECT_DOUBLE_EQ(m.at(1, 0, w), 0.0);
    EXPECT_DOUBLE_EQ(m.at(0, 1, w), 0.0);
    EXPECT_DOUBLE_EQ(m.at(1, 1, w), 0.0);
    EXPECT_DOUBLE_EQ(m.at(0, 2, w), 0.0);
    EXPECT_DOUBLE_EQ(m.at(1, 2, w), 1.0);
  }
}

TEST(WeightMapAnalytic, SamePlaneIsZero) {
  const auto rs = ExposureModel::rolling(0.1, 0.7, 5);
  const WeightMap m = weight_map_analytic(rs, rs, TimeBins(0.0, 1.0, 4), 3);
  for (double v : m.weights) EXPECT_EQ(v, 0.0);
}

TEST(WeightMapAnalytic, ConsecutiveRsFramesCoverMinusOneSecond) {
  const auto src = ExposureModel::rolling(0.0, 1.0, 3);
  const auto dst = ExposureModel::rolling(1.0, 2.0, 3);
  const TimeBins bins(0.0, 2.0, 4);
  const WeightMap m = weight_map_analytic(src, dst, bins, 2);
  for (int h = 0; h < 3; ++h) {
    double sum = 0.0;
    for (int i = 0; i < 4; ++i) sum += m.at(i, h, 0) * bins.width();
    EXPECT_NEAR(sum, -1.0, 1e-12);
  }
}

TEST(WeightMapAnalytic, MatchesIntervalOverlapOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int h = 2 + trial % 7;
    double a = u(rng), b = u(rng);
    const auto src = ExposureModel::rolling(std::min(a, b), std::max(a, b), h);
    const auto dst = ExposureModel::global(u(rng), h);
    const TimeBins bins(0.0, 1.0, 1 + trial % 5);
    const WeightMap m = weight_map_analytic(src, dst, bins, 1);
    for (int i = 0; i < bins.count(); ++i)
      for (int r = 0; r < h; ++r)
        EXPECT_NEAR(m.at(i, r, 0),
                    overlap_oracle(row_exposure_time(dst, r), row_exposure_time(src, r), bins, i),
                    1e-12);
  }
}

TEST(WeightMapAnalytic, PlaneOutsideWindowThrows) {
  const auto src = ExposureModel::rolling(0.0, 1.5, 3);
  const auto dst = ExposureModel::global(0.5, 3);
  EXPECT_THROW(weight_map_analytic(src, dst, TimeBins(0.0, 1.0, 2), 1), Error);
}

// Each sample's interval endpoint can misplace at most half a time cell, and
// the sub-rows span one pixel, over which the endpoints move by half a row
// step in either direction. Sum of both effects, in bin fractions.
namespace {

double sampled_error_bound(const ExposureModel& a, const ExposureModel& b, const TimeBins& bins,
                           int samples_t) {
  auto row_step = [](const ExposureModel& m) {
    return m.height > 1 ? std::abs(m.time_at(1.0) - m.time_at(0.0)) : 0.0;
  };
  return 1.0 / samples_t + 0.5 * (row_step(a) + row_step(b)) / bins.width();
}

}  // namespace

TEST(WeightMapSampled, CloseToAnalytic) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int h = 4 + 9 * trial;
    double a = u(rng), b = u(rng);
    const auto src = ExposureModel::rolling(std::min(a, b), std::max(a, b), h);
    const auto dst = trial % 2 ? ExposureModel::global(u(rng), h)
                               : ExposureModel::rolling(0.2 * u(rng), 0.8 + 0.2 * u(rng), h);
    const TimeBins bins(0.0, 1.0, 2 + trial % 5);
    const WeightMap an = weight_map_analytic(src, dst, bins, 2);
    const WeightMap sa = weight_map_sampled(src, dst, bins, 2, 50, 100);
    EXPECT_LE(max_abs_diff(an, sa), sampled_error_bound(src, dst, bins, 100)) << "H=" << h;
  }
}

TEST(WeightMapSampled, WithinOneTimeCellOnGlobalPlanes) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = ExposureModel::global(u(rng), 5), b = ExposureModel::global(u(rng), 5);
    const TimeBins bins(0.0, 1.0, 1 + trial % 6);
    EXPECT_LE(max_abs_diff(weight_map_analytic(a, b, bins, 1), weight_map_sampled(a, b, bins, 1)),
              0.01);
  }
}

TEST(WeightMapSampled, SamePlaneIsZeroForAnyResolution) {
  const auto rs = ExposureModel::rolling(0.2, 0.9, 6);
  for (int s : {1, 7, 50}) {
    const WeightMap m = weight_map_sampled(rs, rs, TimeBins(0.0, 1.0, 3), 2, s, 2 * s);
    for (double v : m.weights) EXPECT_EQ(v, 0.0);
  }
}

TEST(WeightMapSampled, GlobalToGlobalFullBin) {
  const TimeBins bins(0.0, 1.0, 4);
  const auto g1 = ExposureModel::global(0.25, 3);
  const auto g2 = ExposureModel::global(0.5, 3);
  for (const WeightMap& m : {weight_map_sampled(g1, g2, bins, 2), weight_map_analytic(g1, g2, bins, 2)}) {
    for (int i = 0; i < 4; ++i)
      for (int h = 0; h < 3; ++h) EXPECT_NEAR(m.at(i, h, 1), i == 1 ? -1.0 : 0.0, 1e-12);
  }
  const WeightMap same = weight_map_sampled(g1, g1, bins, 2);
  for (double v : same.weights) EXPECT_EQ(v, 0.0);
}

TEST(WeightMapNegate, FlipsSignsAndSwapsPlanes) {
  const auto src = ExposureModel::rolling(0.0, 1.0, 3);
  const auto dst = ExposureModel::global(0.5, 3);
  const WeightMap m = weight_map_analytic(src, dst, TimeBins(0.0, 1.0, 2), 2);
  const WeightMap n = negate(m);
  EXPECT_DOUBLE_EQ(n.at(0, 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(n.at(1, 0, 0), 0.0);
  EXPECT_EQ(n.source, dst);
  EXPECT_EQ(n.target, src);
}

TEST(WeightMapNegate, DirectConstructionIsAntisymmetric) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int h = 3 + trial;
    double a = u(rng), b = u(rng);
    const auto x = ExposureModel::rolling(std::min(a, b), std::max(a, b), h);
    const auto y = ExposureModel::global(u(rng), h);
    const TimeBins bins(0.0, 1.0, 6);
    const WeightMap xy = weight_map_analytic(x, y, bins, 2);
    const WeightMap yx = weight_map_analytic(y, x, bins, 2);
    EXPECT_EQ(xy.weights, negate(yx).weights);
    const WeightMap sxy = weight_map_sampled(x, y, bins, 2);
    const WeightMap syx = weight_map_sampled(y, x, bins, 2);
    EXPECT_EQ(sxy.weights, negate(syx).weights);
  }
}
