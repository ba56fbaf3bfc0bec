#include "rsevi/displacement_field.hpp"

#include <cmath>

#include "binary_io.hpp"
#include "rsevi/error.hpp"
#include "rsevi/lucas_kanade.hpp"
#include "rsevi/parallel.hpp"

namespace rsevi {

std::array<double, 2> compose_trajectory(const DisplacementField& field,
                                         std::array<double, 2> p0, int i0, int n) {
  if (i0 < 0 || n < 0 || i0 + n > field.bin_count())
    fail_input("compose_trajectory: bin range out of bounds");
  const BilinearTap tap = make_tap(p0[0], p0[1], field.width, field.height);
  std::array<double, 2> p = p0;
  for (int i = i0; i < i0 + n; ++i) {
    for (int c = 0; c < 2; ++c)
      p[c] += tap_value(tap, field.values.data() + field.index(c, i, 0, 0), field.width);
  }
  return p;
}

double smoothness_loss(const DisplacementField& field) {
  const int H = field.height, W = field.width, T = field.bin_count();
  double total = 0.0;
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < T; ++i)
      for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w) {
          const double v = field.at(c, i, h, w);
          if (w + 1 < W) {
            const double d = field.at(c, i, h, w + 1) - v;
            total += d * d;
          }
          if (h + 1 < H) {
            const double d = field.at(c, i, h + 1, w) - v;
            total += d * d;
          }
        }
  return total / (static_cast<double>(T) * field.plane_size());
}

std::vector<double> smoothness_gradient(const DisplacementField& field) {
  const int H = field.height, W = field.width, T = field.bin_count();
  const double scale = 2.0 / (static_cast<double>(T) * field.plane_size());
  std::vector<double> grad(field.values.size(), 0.0);
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < T; ++i)
      for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w) {
          const std::size_t a = field.index(c, i, h, w);
          if (w + 1 < W) {
            const std::size_t b = field.index(c, i, h, w + 1);
            const double d = scale * (field.values[b] - field.values[a]);
            grad[b] += d;
            grad[a] -= d;
          }
          if (h + 1 < H) {
            const std::size_t b = field.index(c, i, h + 1, w);
            const double d = scale * (field.values[b] - field.values[a]);
            grad[b] += d;
            grad[a] -= d;
          }
        }
  return grad;
}

namespace {

using Mat2 = std::array<double, 4>;

Mat2 mul(const Mat2& a, const Mat2& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
          a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

// exp(A t) and integral_0^t exp(A s) ds by power series.
std::pair<Mat2, Mat2> affine_propagators(const Mat2& a, double t) {
  Mat2 expm{1.0, 0.0, 0.0, 1.0};
  Mat2 integral{t, 0.0, 0.0, t};
  Mat2 power{1.0, 0.0, 0.0, 1.0};  // (A t)^k / k!
  for (int k = 1; k < 60; ++k) {
    Mat2 scaled = mul(power, a);
    for (double& v : scaled) v *= t / k;
    power = scaled;
    double mag = 0.0;
    for (int j = 0; j < 4; ++j) {
      expm[j] += power[j];
      integral[j] += power[j] * t / (k + 1);
      mag = std::max(mag, std::abs(power[j]));
    }
    if (mag < 1e-18) break;
  }
  return {expm, integral};
}

}  // namespace

std::array<double, 2> motion_displacement(const MotionModel& model, std::array<double, 2> p,
                                          double duration, int height, int width) {
  if (const auto* tr = std::get_if<Translation>(&model))
    return {tr->vx * duration, tr->vy * duration};
  if (const auto* af = std::get_if<AffineMotion>(&model)) {
    const double qx = p[0] - 0.5 * (width - 1);
    const double qy = p[1] - 0.5 * (height - 1);
    const auto [e, phi] = affine_propagators(af->a, duration);
    const double nx = e[0] * qx + e[1] * qy + phi[0] * af->b[0] + phi[1] * af->b[1];
    const double ny = e[2] * qx + e[3] * qy + phi[2] * af->b[0] + phi[3] * af->b[1];
    return {nx - qx, ny - qy};
  }
  fail_input("scripted motion has no continuous-time displacement");
}

DisplacementField oracle_field(const MotionModel& model, const TimeBins& bins, int height,
                               int width) {
  if (height < 1 || width < 1) fail_input("oracle_field: invalid dims");
  DisplacementField field(bins, height, width);
  const int T = bins.count();
  if (const auto* sc = std::get_if<ScriptedMotion>(&model)) {
    if (static_cast<int>(sc->per_bin.size()) != T)
      fail_consistency("scripted motion table length differs from bin count");
    for (int c = 0; c < 2; ++c)
      for (int i = 0; i < T; ++i)
        for (int h = 0; h < height; ++h)
          for (int w = 0; w < width; ++w) field.at(c, i, h, w) = sc->per_bin[i][c];
    return field;
  }
  for (int i = 0; i < T; ++i) {
    const double duration = bins.boundary(i + 1) - bins.boundary(i);
    parallel_for(0, static_cast<std::size_t>(height), [&](std::size_t row) {
      const int h = static_cast<int>(row);
      for (int w = 0; w < width; ++w) {
        const auto d = motion_displacement(model, {double(w), double(h)}, duration, height, width);
        field.at(0, i, h, w) = d[0];
        field.at(1, i, h, w) = d[1];
      }
    });
  }
  return field;
}

DisplacementField estimate_field_classical(const VoxelGrid& grid) {
  if (grid.bins.count() < 1) fail_input("estimate_field_classical: need at least one bin");
  std::vector<Plane> images = bin_event_images(grid);
  for (Plane& img : images) {
    for (double& v : img.values) v = std::abs(v);
    img = box_filter3(img);
  }
  DisplacementField field(grid.bins, grid.height, grid.width);
  const LucasKanadeParams params;
  for (int k = 0; k < grid.bins.count(); ++k) {
    const FlowMap flow = lucas_kanade_dense(images[k], images[k + 1], params);
    std::copy(flow.dx.begin(), flow.dx.end(), field.values.begin() + field.index(0, k, 0, 0));
    std::copy(flow.dy.begin(), flow.dy.end(), field.values.begin() + field.index(1, k, 0, 0));
  }
  return field;
}

std::vector<std::uint8_t> encode_dfb(const DisplacementField& field) {
  detail::ByteWriter w;
  w.magic("DFB1");
  w.put(static_cast<std::uint32_t>(field.bin_count()));
  w.put(static_cast<std::uint32_t>(field.height));
  w.put(static_cast<std::uint32_t>(field.width));
  w.put(field.bins.t0());
  w.put(field.bins.t1());
  for (double v : field.values) w.put(static_cast<float>(v));
  return w.bytes();
}

DisplacementField decode_dfb(std::vector<std::uint8_t> bytes, const std::string& origin) {
  detail::ByteReader r(std::move(bytes), origin);
  r.expect_magic("DFB1");
  const auto t = r.get<std::uint32_t>();
  const auto h = r.get<std::uint32_t>();
  const auto w = r.get<std::uint32_t>();
  const double t0 = r.get<double>();
  const double t1 = r.get<double>();
  if (t == 0 || h == 0 || w == 0) fail_input("invalid DFB1 header in " + origin);
  DisplacementField field(TimeBins(t0, t1, static_cast<int>(t)), static_cast<int>(h),
                          static_cast<int>(w));
  if (r.remaining() != field.values.size() * sizeof(float))
    fail_input("DFB1 payload size mismatch in " + origin);
  for (double& v : field.values) {
    v = r.get<float>();
    if (!std::isfinite(v)) fail_input("non-finite displacement in " + origin);
  }
  return field;
}

void write_dfb(const DisplacementField& field, const std::string& path) {
  detail::save_bytes(encode_dfb(field), path);
}

DisplacementField read_dfb(const std::string& path) {
  return decode_dfb(detail::load_bytes(path), path);
}

}  // namespace rsevi
