#include "rsevi/exposure.hpp"

#include <algorithm>
#include <cmath>

#include "binary_io.hpp"
#include "rsevi/error.hpp"
#include "rsevi/parallel.hpp"

namespace rsevi {

double row_exposure_time(const ExposureModel& model, int h) {
  if (h < 0 || h >= model.height) fail_input("row index out of range");
  return model.time_at(h);
}

double rs_effective_frame_rate(double gs_fps, int rows) {
  if (!(gs_fps > 0.0) || rows < 1) fail_input("rs_effective_frame_rate: invalid arguments");
  return gs_fps / rows;
}

TimeBins::TimeBins(double t0, double t1, int count) : t0_(t0), t1_(t1), count_(count) {
  if (!std::isfinite(t0) || !std::isfinite(t1) || !(t1 > t0))
    fail_input("time bins require t1 > t0");
  if (count < 1) fail_input("time bins require at least one bin");
}

double TimeBins::boundary(int i) const noexcept {
  if (i >= count_) return t1_;
  return t0_ + i * ((t1_ - t0_) / count_);
}

namespace {

void check_inputs(const ExposureModel& src, const ExposureModel& dst,
                  const TimeBins& bins, int width) {
  if (width < 1) fail_input("weight map width must be positive");
  if (src.height != dst.height) fail_consistency("exposure models disagree on height");
  const double slack = 1e-12 * (bins.t1() - bins.t0());
  for (const ExposureModel* m : {&src, &dst}) {
    if (m->first_time() < bins.t0() - slack || m->last_time() > bins.t1() + slack)
      fail_consistency("exposure plane lies outside the time-bin window");
  }
}

void broadcast_columns(WeightMap& map, int i, int h, double value) {
  for (int w = 0; w < map.width; ++w) map.at(i, h, w) = value;
}

}  // namespace

WeightMap weight_map_analytic(const ExposureModel& src, const ExposureModel& dst,
                              const TimeBins& bins, int width) {
  check_inputs(src, dst, bins, width);
  WeightMap map(bins.count(), dst.height, width);
  map.source = src;
  map.target = dst;
  const double delta = bins.width();
  parallel_for(0, static_cast<std::size_t>(dst.height), [&](std::size_t row) {
    const int h = static_cast<int>(row);
    const double from = dst.time_at(h);
    const double to = src.time_at(h);
    const double lo = std::min(from, to);
    const double hi = std::max(from, to);
    const double sign = to > from ? 1.0 : (to < from ? -1.0 : 0.0);
    for (int i = 0; i < bins.count(); ++i) {
      const double overlap =
          std::max(0.0, std::min(hi, bins.boundary(i + 1)) - std::max(lo, bins.boundary(i)));
      broadcast_columns(map, i, h, sign == 0.0 ? 0.0 : sign * overlap / delta);
    }
  });
  return map;
}

WeightMap weight_map_sampled(const ExposureModel& src, const ExposureModel& dst,
                             const TimeBins& bins, int width, int samples_h,
                             int samples_t) {
  check_inputs(src, dst, bins, width);
  if (samples_h < 1 || samples_t < 1) fail_input("sample counts must be positive");
  WeightMap map(bins.count(), dst.height, width);
  map.source = src;
  map.target = dst;
  const double delta = bins.width();
  const double total = static_cast<double>(samples_h) * samples_t;
  parallel_for(0, static_cast<std::size_t>(dst.height), [&](std::size_t row) {
    const int h = static_cast<int>(row);
    for (int i = 0; i < bins.count(); ++i) {
      const double bin_start = bins.boundary(i);
      long long count = 0;
      for (int k = 0; k < samples_h; ++k) {
        const double sub_row = h - 0.5 + (k + 0.5) / samples_h;
        const double from = dst.time_at(sub_row);
        const double to = src.time_at(sub_row);
        for (int l = 0; l < samples_t; ++l) {
          const double t = bin_start + (l + 0.5) / samples_t * delta;
          if (from < t && t < to) {
            ++count;
          } else if (to < t && t < from) {
            --count;
          }
        }
      }
      broadcast_columns(map, i, h, count == 0 ? 0.0 : count / total);
    }
  });
  return map;
}

WeightMap negate(const WeightMap& map) {
  WeightMap out = map;
  for (double& v : out.weights) v = -v;
  std::swap(out.source, out.target);
  return out;
}

namespace {

void put_model(detail::ByteWriter& w, const ExposureModel& m) {
  if (const auto* rs = std::get_if<RollingShutter>(&m.kind)) {
    w.put(std::uint8_t{0});
    w.put(rs->t_start);
    w.put(rs->t_end);
  } else {
    w.put(std::uint8_t{1});
    w.put(std::get<GlobalShutter>(m.kind).t_g);
  }
}

ExposureModel get_model(detail::ByteReader& r, int height) {
  const auto tag = r.get<std::uint8_t>();
  if (tag == 0) {
    const double ts = r.get<double>();
    const double te = r.get<double>();
    return ExposureModel::rolling(ts, te, height);
  }
  if (tag == 1) return ExposureModel::global(r.get<double>(), height);
  fail_input("unknown exposure model tag in WMP1");
}

}  // namespace

std::vector<std::uint8_t> encode_wmp(const WeightMap& map) {
  detail::ByteWriter w;
  w.magic("WMP1");
  w.put(static_cast<std::uint32_t>(map.bins));
  w.put(static_cast<std::uint32_t>(map.height));
  w.put(static_cast<std::uint32_t>(map.width));
  put_model(w, map.source);
  put_model(w, map.target);
  for (double v : map.weights) w.put(static_cast<float>(v));
  return w.bytes();
}

WeightMap decode_wmp(std::vector<std::uint8_t> bytes, const std::string& origin) {
  detail::ByteReader r(std::move(bytes), origin);
  r.expect_magic("WMP1");
  const auto t = r.get<std::uint32_t>();
  const auto h = r.get<std::uint32_t>();
  const auto w = r.get<std::uint32_t>();
  if (t == 0 || h == 0 || w == 0) fail_input("invalid WMP1 header in " + origin);
  WeightMap map(static_cast<int>(t), static_cast<int>(h), static_cast<int>(w));
  map.source = get_model(r, map.height);
  map.target = get_model(r, map.height);
  if (r.remaining() != map.weights.size() * sizeof(float))
    fail_input("WMP1 payload size mismatch in " + origin);
  for (double& v : map.weights) v = r.get<float>();
  return map;
}

void write_wmp(const WeightMap& map, const std::string& path) {
  detail::save_bytes(encode_wmp(map), path);
}

WeightMap read_wmp(const std::string& path) {
  return decode_wmp(detail::load_bytes(path), path);
}

}  // namespace rsevi
