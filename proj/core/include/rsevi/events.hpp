#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rsevi/exposure.hpp"
#include "rsevi/frame.hpp"

namespace rsevi {

struct Event {
  double t = 0.0;
  std::uint16_t x = 0;  ///< column
  std::uint16_t y = 0;  ///< row
  std::int8_t p = 1;    ///< +1 or -1

  bool operator==(const Event&) const = default;
};

/// Sort key used everywhere events are ordered: (t, y, x, p).
bool event_before(const Event& a, const Event& b) noexcept;

struct EventStream {
  int width = 0;
  int height = 0;
  double t_begin = 0.0;
  double t_end = 0.0;
  std::vector<Event> events;  ///< sorted by event_before

  /// Throws unless events are sorted, inside the sensor and inside
  /// [t_begin, t_end].
  void validate() const;
};

inline constexpr double kDefaultLogEps = 1e-3;

/// Ideal event camera driven by a timestamped frame sequence. Per pixel the
/// log intensity log(L + log_eps) is linear between consecutive frames; an
/// event fires whenever it crosses the next multiple of `threshold` away
/// from the last event's reference level, and the reference is reset to the
/// crossed level. 3-channel frames are reduced to luminance first.
EventStream simulate_events(std::span<const Frame> frames, double threshold,
                            double log_eps = kDefaultLogEps);

/// Row h of the result is row h of the frame whose timestamp is nearest to
/// the row's exposure time (ties go to the earlier frame).
Frame synthesize_rs(std::span<const Frame> frames, const ExposureModel& model);

/// Event voxel grid of (T + 1) x N x H x W. Temporal bin k is centred on the
/// displacement-bin boundary tau_k and has width delta, so the grid spans
/// [t0 - delta/2, t1 + delta/2]. Each bin is split into N sub-bins.
struct VoxelGrid {
  TimeBins bins;
  int subbins = 0;
  int height = 0;
  int width = 0;
  std::vector<double> values;  // [bin][subbin][row][col]

  VoxelGrid() = default;
  VoxelGrid(const TimeBins& b, int n, int h, int w)
      : bins(b), subbins(n), height(h), width(w),
        values(static_cast<std::size_t>(b.count() + 1) * n * h * w, 0.0) {}

  int bin_count() const noexcept { return bins.count() + 1; }
  double& at(int k, int n, int y, int x) {
    return values[((static_cast<std::size_t>(k) * subbins + n) * height + y) * width + x];
  }
  double at(int k, int n, int y, int x) const {
    return values[((static_cast<std::size_t>(k) * subbins + n) * height + y) * width + x];
  }
};

/// Events with t in [t_lo, t_hi]; the result's bounds are set to the range.
EventStream crop_events(const EventStream& stream, double t_lo, double t_hi);

inline constexpr int kDefaultSubbins = 5;

/// Each event deposits its polarity into the two sub-voxels of its bin whose
/// centres bracket it, with linear weights in time (clamped at the bin edges).
VoxelGrid voxelize(const EventStream& stream, const TimeBins& bins,
                   int subbins = kDefaultSubbins);

/// Image k = sum over sub-bins of grid bin k.
std::vector<Plane> bin_event_images(const VoxelGrid& grid);

/// EVS1: "EVS1", u32 version=1, u32 width, u32 height, u64 count,
/// f64 t_begin, f64 t_end, then 16-byte records (f64 t, u16 x, u16 y, i8 p,
/// 3 zero bytes). Little-endian.
std::vector<std::uint8_t> encode_evs(const EventStream& stream);
EventStream decode_evs(std::vector<std::uint8_t> bytes, const std::string& origin = "<memory>");
void write_evs(const EventStream& stream, const std::string& path);
EventStream read_evs(const std::string& path);

/// CSV with header `t,x,y,p`. Sensor size and time bounds must be supplied on
/// read since the text form does not carry them.
void write_events_csv(const EventStream& stream, const std::string& path);
EventStream read_events_csv(const std::string& path, int width, int height,
                            double t_begin, double t_end);

}  // namespace rsevi
