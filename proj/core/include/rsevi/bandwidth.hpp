#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "rsevi/events.hpp"

namespace rsevi {

/// Raw parameter count of a video: round(fps * seconds) frames of H x W.
std::uint64_t video_params(double fps, int height, int width, double seconds);

/// Raw parameter count of an event stream: 4 per event.
std::uint64_t event_params(const EventStream& stream);

struct ReductionRatio {
  double ratio = 0.0;    ///< clamped to [0, 1]
  bool clamped = false;  ///< true when RS video + events exceed the target video
};

/// 1 - (video_params(rs_fps) + event_params) / video_params(target_fps).
ReductionRatio reduction_ratio(double rs_fps, const EventStream& stream, double target_fps,
                               int height, int width, double seconds);

struct BandwidthReport {
  std::uint64_t video_params = 0;  ///< target high-frame-rate video
  std::uint64_t event_params = 0;
  std::uint64_t rs_params = 0;     ///< low-frame-rate RS video
  double reduction_ratio = 0.0;
  bool clamped = false;
  double duration_s = 0.0;
  int height = 0;
  int width = 0;
  double rs_fps = 0.0;
  double target_fps = 0.0;
};

/// Sensor size is taken from the stream.
BandwidthReport bandwidth_report(double rs_fps, const EventStream& stream, double target_fps,
                                 double seconds);

/// JSON object with keys video_params, event_params, rs_params,
/// reduction_ratio, clamped, duration_s, height, width.
std::string to_json(const BandwidthReport& report);

/// Fraction of pixels per event count, counting events with
/// t in [t_begin, t_begin + window].
std::map<int, double> event_rate_histogram(const EventStream& stream, double window);

}  // namespace rsevi
