#include "rsevi/bandwidth.hpp"

#include <cmath>
#include <vector>

#include "json.hpp"
#include "rsevi/error.hpp"

namespace rsevi {

std::uint64_t video_params(double fps, int height, int width, double seconds) {
  if (!(fps > 0.0) || height < 1 || width < 1 || !(seconds >= 0.0))
    fail_input("video_params: invalid arguments");
  const auto frames = static_cast<std::uint64_t>(std::llround(fps * seconds));
  return frames * static_cast<std::uint64_t>(height) * static_cast<std::uint64_t>(width);
}

std::uint64_t event_params(const EventStream& stream) {
  return 4 * static_cast<std::uint64_t>(stream.events.size());
}

ReductionRatio reduction_ratio(double rs_fps, const EventStream& stream, double target_fps,
                               int height, int width, double seconds) {
  if (!(seconds > 0.0)) fail_input("reduction_ratio: duration must be positive");
  if (!(target_fps > rs_fps)) fail_input("reduction_ratio: target fps must exceed RS fps");
  const std::uint64_t target = video_params(target_fps, height, width, seconds);
  if (target == 0) fail_input("reduction_ratio: target video has no frames");
  const std::uint64_t used = video_params(rs_fps, height, width, seconds) + event_params(stream);
  ReductionRatio r;
  r.ratio = 1.0 - static_cast<double>(used) / static_cast<double>(target);
  if (r.ratio < 0.0) {
    r.ratio = 0.0;
    r.clamped = true;
  }
  return r;
}

BandwidthReport bandwidth_report(double rs_fps, const EventStream& stream, double target_fps,
                                 double seconds) {
  const ReductionRatio r =
      reduction_ratio(rs_fps, stream, target_fps, stream.height, stream.width, seconds);
  BandwidthReport rep;
  rep.video_params = video_params(target_fps, stream.height, stream.width, seconds);
  rep.event_params = event_params(stream);
  rep.rs_params = video_params(rs_fps, stream.height, stream.width, seconds);
  rep.reduction_ratio = r.ratio;
  rep.clamped = r.clamped;
  rep.duration_s = seconds;
  rep.height = stream.height;
  rep.width = stream.width;
  rep.rs_fps = rs_fps;
  rep.target_fps = target_fps;
  return rep;
}

std::string to_json(const BandwidthReport& report) {
  nlohmann::ordered_json j;
  j["video_params"] = report.video_params;
  j["event_params"] = report.event_params;
  j["rs_params"] = report.rs_params;
  j["reduction_ratio"] = report.reduction_ratio;
  j["clamped"] = report.clamped;
  j["duration_s"] = report.duration_s;
  j["height"] = report.height;
  j["width"] = report.width;
  return j.dump(2);
}

std::map<int, double> event_rate_histogram(const EventStream& stream, double window) {
  if (!(window > 0.0)) fail_input("event_rate_histogram: window must be positive");
  if (stream.width < 1 || stream.height < 1) fail_input("event_rate_histogram: empty sensor");
  const double end = stream.t_begin + window;
  std::vector<int> counts(static_cast<std::size_t>(stream.width) * stream.height, 0);
  for (const Event& e : stream.events) {
    if (e.t < stream.t_begin || e.t > end) continue;
    ++counts[static_cast<std::size_t>(e.y) * stream.width + e.x];
  }
  std::map<int, std::size_t> tally;
  for (int c : counts) ++tally[c];
  std::map<int, double> hist;
  const double pixels = static_cast<double>(counts.size());
  for (const auto& [count, n] : tally) hist[count] = static_cast<double>(n) / pixels;
  return hist;
}

}  // namespace rsevi
