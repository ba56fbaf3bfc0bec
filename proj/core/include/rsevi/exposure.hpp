#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rsevi/exposure_model.hpp"

namespace rsevi {

/// Exposure time of integer row h: t_start + h * (t_end - t_start) / (H - 1)
/// for rolling shutter, t_g for global shutter.
double row_exposure_time(const ExposureModel& model, int h);

/// Rolling-shutter frame rate when each row consumes one frame of a
/// gs_fps global-shutter source.
double rs_effective_frame_rate(double gs_fps, int rows);

/// T equal-width bins over [t0, t1]; boundary i is t0 + i * (t1 - t0) / T.
class TimeBins {
 public:
  TimeBins() = default;
  TimeBins(double t0, double t1, int count);

  double t0() const noexcept { return t0_; }
  double t1() const noexcept { return t1_; }
  int count() const noexcept { return count_; }
  double width() const noexcept { return (t1_ - t0_) / count_; }
  double boundary(int i) const noexcept;

  bool operator==(const TimeBins&) const = default;

 private:
  double t0_ = 0.0;
  double t1_ = 1.0;
  int count_ = 1;
};

/// Signed temporal-selection weights, T x H x W, for warping between two
/// exposure planes. Defined on the destination grid: entry (i, h, w) is the
/// signed fraction of bin i covered by the interval from the destination
/// row's time to the source row's time, positive when the source is later.
/// Weights are constant along the column axis.
struct WeightMap {
  int bins = 0;
  int height = 0;
  int width = 0;
  std::vector<double> weights;  // [bin][row][col]
  ExposureModel source;
  ExposureModel target;

  WeightMap() = default;
  WeightMap(int t, int h, int w)
      : bins(t), height(h), width(w),
        weights(static_cast<std::size_t>(t) * h * w, 0.0) {}

  double& at(int i, int h, int w) {
    return weights[(static_cast<std::size_t>(i) * height + h) * width + w];
  }
  double at(int i, int h, int w) const {
    return weights[(static_cast<std::size_t>(i) * height + h) * width + w];
  }
};

/// Exact interval-overlap weights.
WeightMap weight_map_analytic(const ExposureModel& src, const ExposureModel& dst,
                              const TimeBins& bins, int width);

inline constexpr int kDefaultSamplesH = 50;
inline constexpr int kDefaultSamplesT = 100;

/// Riemann estimate on a samples_h x samples_t grid of cell centres per
/// (bin, row) element.
WeightMap weight_map_sampled(const ExposureModel& src, const ExposureModel& dst,
                             const TimeBins& bins, int width,
                             int samples_h = kDefaultSamplesH,
                             int samples_t = kDefaultSamplesT);

/// Elementwise sign flip with source and target swapped.
WeightMap negate(const WeightMap& map);

/// WMP1 serialization: "WMP1", u32 T, H, W, source and target exposure
/// models (tag byte 0 = RS with f64 t_start, t_end; 1 = GS with f64 t_g),
/// f32 weights [bin][row][col]. Little-endian.
std::vector<std::uint8_t> encode_wmp(const WeightMap& map);
WeightMap decode_wmp(std::vector<std::uint8_t> bytes, const std::string& origin = "<memory>");
void write_wmp(const WeightMap& map, const std::string& path);
WeightMap read_wmp(const std::string& path);

}  // namespace rsevi
