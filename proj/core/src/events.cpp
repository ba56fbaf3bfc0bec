#include "rsevi/events.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "binary_io.hpp"
#include "rsevi/error.hpp"
#include "rsevi/parallel.hpp"

namespace rsevi {

bool event_before(const Event& a, const Event& b) noexcept {
  if (a.t != b.t) return a.t < b.t;
  if (a.y != b.y) return a.y < b.y;
  if (a.x != b.x) return a.x < b.x;
  return a.p < b.p;
}

void EventStream::validate() const {
  if (width < 1 || height < 1 || width > 65535 || height > 65535)
    fail_input("event stream has invalid sensor size");
  if (!(t_end >= t_begin)) fail_input("event stream has t_end < t_begin");
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    if (e.x >= width || e.y >= height) fail_input("event outside the sensor");
    if (e.p != 1 && e.p != -1) fail_input("event polarity must be +1 or -1");
    if (!(e.t >= t_begin && e.t <= t_end)) fail_input("event outside the stream bounds");
    if (i > 0 && event_before(e, events[i - 1])) fail_input("event stream is not sorted");
  }
}

namespace {

void check_sequence(std::span<const Frame> frames) {
  if (frames.size() < 2) fail_input("need at least two frames");
  for (std::size_t k = 0; k < frames.size(); ++k) {
    if (!frames[k].same_shape(frames[0])) fail_consistency("frame dims differ in sequence");
    if (k > 0 && !(frames[k].timestamp > frames[k - 1].timestamp))
      fail_input("frame timestamps must be strictly increasing");
  }
}

}  // namespace

EventStream simulate_events(std::span<const Frame> frames, double threshold,
                            double log_eps) {
  check_sequence(frames);
  if (!(threshold > 0.0)) fail_input("contrast threshold must be positive");
  if (!(log_eps >= 0.0)) fail_input("log_eps must be non-negative");

  const int H = frames[0].height;
  const int W = frames[0].width;
  if (W > 65535 || H > 65535) fail_input("sensor too large for EVS1 coordinates");

  std::vector<std::vector<double>> log_frames(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const Frame lum = luminance(frames[k]);
    log_frames[k].resize(lum.data.size());
    for (std::size_t i = 0; i < lum.data.size(); ++i) {
      const double v = lum.data[i] + log_eps;
      if (!(v > 0.0)) fail_input("log intensity undefined: zero pixel with log_eps = 0");
      log_frames[k][i] = std::log(v);
    }
  }

  std::vector<std::vector<Event>> per_row(static_cast<std::size_t>(H));
  parallel_for(0, static_cast<std::size_t>(H), [&](std::size_t row) {
    auto& out = per_row[row];
    for (int x = 0; x < W; ++x) {
      const std::size_t p = row * static_cast<std::size_t>(W) + x;
      const double base = log_frames[0][p];
      long long level = 0;  // reference = base + level * threshold
      for (std::size_t k = 0; k + 1 < frames.size(); ++k) {
        const double la = log_frames[k][p];
        const double lb = log_frames[k + 1][p];
        if (la == lb) continue;
        const double ta = frames[k].timestamp;
        const double span = frames[k + 1].timestamp - ta;
        const auto emit = [&](double crossing, std::int8_t polarity) {
          const double t = ta + (crossing - la) / (lb - la) * span;
          out.push_back(Event{t, static_cast<std::uint16_t>(x),
                              static_cast<std::uint16_t>(row), polarity});
        };
        if (lb > la) {
          while (base + (level + 1) * threshold <= lb) {
            ++level;
            emit(base + level * threshold, 1);
          }
        } else {
          while (base + (level - 1) * threshold >= lb) {
            --level;
            emit(base + level * threshold, -1);
          }
        }
      }
    }
  });

  EventStream stream;
  stream.width = W;
  stream.height = H;
  stream.t_begin = frames.front().timestamp;
  stream.t_end = frames.back().timestamp;
  std::size_t total = 0;
  for (const auto& r : per_row) total += r.size();
  stream.events.reserve(total);
  for (const auto& r : per_row) stream.events.insert(stream.events.end(), r.begin(), r.end());
  std::sort(stream.events.begin(), stream.events.end(), event_before);
  return stream;
}

Frame synthesize_rs(std::span<const Frame> frames, const ExposureModel& model) {
  check_sequence(frames);
  if (!model.is_rolling()) fail_input("synthesize_rs expects a rolling-shutter model");
  if (model.height != frames[0].height)
    fail_consistency("exposure model height differs from frame height");
  const double slack = 1e-9 * std::max(1.0, std::abs(model.last_time()));
  if (frames.front().timestamp > model.first_time() + slack ||
      frames.back().timestamp < model.last_time() - slack)
    fail_consistency("frames do not cover the rolling-shutter exposure");

  Frame out(frames[0].height, frames[0].width, frames[0].channels);
  out.timestamp = model.first_time();
  out.exposure = model;
  const std::size_t row_len = static_cast<std::size_t>(out.width) * out.channels;
  for (int h = 0; h < out.height; ++h) {
    const double t = row_exposure_time(model, h);
    auto it = std::lower_bound(frames.begin(), frames.end(), t,
                               [](const Frame& f, double v) { return f.timestamp < v; });
    std::size_t idx;
    if (it == frames.begin()) {
      idx = 0;
    } else if (it == frames.end()) {
      idx = frames.size() - 1;
    } else {
      const std::size_t hi = static_cast<std::size_t>(it - frames.begin());
      const double d_lo = t - frames[hi - 1].timestamp;
      const double d_hi = frames[hi].timestamp - t;
      idx = d_hi < d_lo ? hi : hi - 1;
    }
    const auto& src = frames[idx].data;
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(h * row_len), row_len,
                out.data.begin() + static_cast<std::ptrdiff_t>(h * row_len));
  }
  return out;
}

EventStream crop_events(const EventStream& stream, double t_lo, double t_hi) {
  if (!(t_hi >= t_lo)) fail_input("crop_events: empty range");
  EventStream out{stream.width, stream.height, t_lo, t_hi, {}};
  auto first = std::lower_bound(stream.events.begin(), stream.events.end(), t_lo,
                                [](const Event& e, double t) { return e.t < t; });
  auto last = std::upper_bound(first, stream.events.end(), t_hi,
                               [](double t, const Event& e) { return t < e.t; });
  out.events.assign(first, last);
  return out;
}

VoxelGrid voxelize(const EventStream& stream, const TimeBins& bins, int subbins) {
  if (subbins < 1) fail_input("sub-bin count must be positive");
  const double delta = bins.width();
  const double lo = bins.t0() - 0.5 * delta;
  const double hi = bins.t1() + 0.5 * delta;
  for (const Event& e : stream.events) {
    if (e.t < lo || e.t > hi) fail_consistency("event outside the voxel-grid window");
    if (e.x >= stream.width || e.y >= stream.height) fail_input("event outside the sensor");
  }

  VoxelGrid grid(bins, subbins, stream.height, stream.width);
  const int K = grid.bin_count();
  const double sub_width = delta / subbins;
  const auto bin_of = [&](double t) {
    return std::clamp(static_cast<int>(std::floor((t - lo) / delta)), 0, K - 1);
  };

  // Group event indices by bin in stream order, then fill bins independently.
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(K));
  for (std::size_t i = 0; i < stream.events.size(); ++i)
    members[bin_of(stream.events[i].t)].push_back(i);

  parallel_for(0, static_cast<std::size_t>(K), [&](std::size_t kk) {
    const int k = static_cast<int>(kk);
    const double bin_start = bins.boundary(k) - 0.5 * delta;
    for (std::size_t i : members[kk]) {
      const Event& e = stream.events[i];
      const double u = (e.t - bin_start) / sub_width - 0.5;
      const double p = e.p;
      if (u <= 0.0) {
        grid.at(k, 0, e.y, e.x) += p;
      } else if (u >= subbins - 1) {
        grid.at(k, subbins - 1, e.y, e.x) += p;
      } else {
        const int n0 = static_cast<int>(std::floor(u));
        const double frac = u - n0;
        grid.at(k, n0, e.y, e.x) += (1.0 - frac) * p;
        if (frac > 0.0) grid.at(k, n0 + 1, e.y, e.x) += frac * p;
      }
    }
  });
  return grid;
}

std::vector<Plane> bin_event_images(const VoxelGrid& grid) {
  std::vector<Plane> images;
  images.reserve(static_cast<std::size_t>(grid.bin_count()));
  for (int k = 0; k < grid.bin_count(); ++k) {
    Plane img(grid.height, grid.width);
    for (int n = 0; n < grid.subbins; ++n)
      for (int y = 0; y < grid.height; ++y)
        for (int x = 0; x < grid.width; ++x) img.at(y, x) += grid.at(k, n, y, x);
    images.push_back(std::move(img));
  }
  return images;
}

std::vector<std::uint8_t> encode_evs(const EventStream& stream) {
  detail::ByteWriter w;
  w.magic("EVS1");
  w.put(std::uint32_t{1});
  w.put(static_cast<std::uint32_t>(stream.width));
  w.put(static_cast<std::uint32_t>(stream.height));
  w.put(static_cast<std::uint64_t>(stream.events.size()));
  w.put(stream.t_begin);
  w.put(stream.t_end);
  for (const Event& e : stream.events) {
    w.put(e.t);
    w.put(e.x);
    w.put(e.y);
    w.put(e.p);
    w.zeros(3);
  }
  return w.bytes();
}

EventStream decode_evs(std::vector<std::uint8_t> bytes, const std::string& origin) {
  detail::ByteReader r(std::move(bytes), origin);
  r.expect_magic("EVS1");
  if (r.get<std::uint32_t>() != 1) fail_input("unsupported EVS1 version in " + origin);
  EventStream s;
  s.width = static_cast<int>(r.get<std::uint32_t>());
  s.height = static_cast<int>(r.get<std::uint32_t>());
  const auto count = r.get<std::uint64_t>();
  s.t_begin = r.get<double>();
  s.t_end = r.get<double>();
  if (r.remaining() != count * 16) fail_input("EVS1 record count mismatch in " + origin);
  s.events.resize(count);
  for (Event& e : s.events) {
    e.t = r.get<double>();
    e.x = r.get<std::uint16_t>();
    e.y = r.get<std::uint16_t>();
    e.p = r.get<std::int8_t>();
    r.skip(3);
  }
  s.validate();
  return s;
}

void write_evs(const EventStream& stream, const std::string& path) {
  detail::save_bytes(encode_evs(stream), path);
}

EventStream read_evs(const std::string& path) {
  return decode_evs(detail::load_bytes(path), path);
}

void write_events_csv(const EventStream& stream, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail_input("cannot open for writing: " + path);
  out << "t,x,y,p\n" << std::setprecision(17);
  for (const Event& e : stream.events)
    out << e.t << ',' << e.x << ',' << e.y << ',' << static_cast<int>(e.p) << '\n';
}

EventStream read_events_csv(const std::string& path, int width, int height,
                            double t_begin, double t_end) {
  std::ifstream in(path);
  if (!in) fail_input("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "t,x,y,p") fail_input("missing CSV header in " + path);
  EventStream s{width, height, t_begin, t_end, {}};
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    double t;
    int x, y, p;
    char c1, c2, c3;
    if (!(row >> t >> c1 >> x >> c2 >> y >> c3 >> p) || c1 != ',' || c2 != ',' || c3 != ',')
      fail_input("malformed event row in " + path + ": " + line);
    if (x < 0 || y < 0 || x > 65535 || y > 65535) fail_input("event coordinate out of range");
    s.events.push_back(Event{t, static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y),
                             static_cast<std::int8_t>(p)});
  }
  s.validate();
  return s;
}

}  // namespace rsevi
