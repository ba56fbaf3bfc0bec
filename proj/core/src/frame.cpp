#include "rsevi/frame.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rsevi/error.hpp"
#include "rsevi/parallel.hpp"

namespace rsevi {

double ExposureModel::first_time() const noexcept {
  if (const auto* rs = std::get_if<RollingShutter>(&kind)) return rs->t_start;
  return std::get<GlobalShutter>(kind).t_g;
}

double ExposureModel::last_time() const noexcept {
  if (const auto* rs = std::get_if<RollingShutter>(&kind)) return rs->t_end;
  return std::get<GlobalShutter>(kind).t_g;
}

double ExposureModel::time_at(double h) const noexcept {
  if (const auto* rs = std::get_if<RollingShutter>(&kind)) {
    const double row_interval = (rs->t_end - rs->t_start) / (height - 1);
    return rs->t_start + h * row_interval;
  }
  return std::get<GlobalShutter>(kind).t_g;
}

ExposureModel ExposureModel::rolling(double t_start, double t_end, int height) {
  if (!std::isfinite(t_start) || !std::isfinite(t_end) || !(t_end > t_start))
    fail_input("rolling shutter requires t_end > t_start");
  if (height < 2) fail_input("rolling shutter requires at least 2 rows");
  return ExposureModel{RollingShutter{t_start, t_end}, height};
}

ExposureModel ExposureModel::global(double t_g, int height) {
  if (!std::isfinite(t_g)) fail_input("global shutter time must be finite");
  if (height < 1) fail_input("global shutter requires at least 1 row");
  return ExposureModel{GlobalShutter{t_g}, height};
}

Frame::Frame(int h, int w, int c, double fill)
    : height(h), width(w), channels(c),
      data(static_cast<std::size_t>(h) * w * c, fill) {
  if (h < 1 || w < 1 || (c != 1 && c != 3))
    fail_input("frame dims must be positive with 1 or 3 channels");
}

void validate_frame(const Frame& frame) {
  if (frame.height < 1 || frame.width < 1 || (frame.channels != 1 && frame.channels != 3))
    fail_input("invalid frame dims");
  if (frame.data.size() != frame.pixel_count() * frame.channels)
    fail_input("frame data length does not match dims");
  for (double v : frame.data) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      fail_input("frame values must be finite and within [0,1]");
  }
}

BilinearTap make_tap(double x, double y, int width, int height) {
  if (!std::isfinite(x) || !std::isfinite(y))
    fail_numeric("non-finite sample coordinate");
  BilinearTap t;
  const double xmax = width - 1;
  const double ymax = height - 1;
  t.clamped_x = x < 0.0 || x > xmax;
  t.clamped_y = y < 0.0 || y > ymax;
  t.in_bounds = !t.clamped_x && !t.clamped_y;
  const double xc = std::clamp(x, 0.0, xmax);
  const double yc = std::clamp(y, 0.0, ymax);
  t.x0 = static_cast<int>(std::floor(xc));
  t.y0 = static_cast<int>(std::floor(yc));
  t.x1 = std::min(t.x0 + 1, width - 1);
  t.y1 = std::min(t.y0 + 1, height - 1);
  t.fx = xc - t.x0;
  t.fy = yc - t.y0;
  return t;
}

std::array<double, 3> bilinear_sample(const Frame& img, double x, double y) {
  const BilinearTap tap = make_tap(x, y, img.width, img.height);
  std::array<double, 3> out{0.0, 0.0, 0.0};
  for (int c = 0; c < img.channels; ++c)
    out[c] = tap_value(tap, img.data.data(), img.width, img.channels, c);
  return out;
}

WarpResult warp_backward(const Frame& src, const FlowMap& flow) {
  if (src.height != flow.height || src.width != flow.width)
    fail_consistency("warp_backward: frame and flow dims differ");
  WarpResult r{Frame(src.height, src.width, src.channels),
               ValidityMask(src.height, src.width, 0)};
  r.image.timestamp = src.timestamp;
  const int W = src.width;
  const int C = src.channels;
  parallel_for(0, static_cast<std::size_t>(src.height), [&](std::size_t row) {
    const int y = static_cast<int>(row);
    for (int x = 0; x < W; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * W + x;
      const BilinearTap tap = make_tap(x + flow.dx[p], y + flow.dy[p], W, src.height);
      for (int c = 0; c < C; ++c)
        r.image.data[p * C + c] = tap_value(tap, src.data.data(), W, C, c);
      r.mask.values[p] = tap.in_bounds ? 1 : 0;
    }
  });
  return r;
}

FlowMap warp_flow(const FlowMap& field, const FlowMap& by) {
  if (field.height != by.height || field.width != by.width)
    fail_consistency("warp_flow: dims differ");
  FlowMap out(field.height, field.width);
  const int W = field.width;
  parallel_for(0, static_cast<std::size_t>(field.height), [&](std::size_t row) {
    const int y = static_cast<int>(row);
    for (int x = 0; x < W; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * W + x;
      const BilinearTap tap = make_tap(x + by.dx[p], y + by.dy[p], W, field.height);
      out.dx[p] = tap_value(tap, field.dx.data(), W);
      out.dy[p] = tap_value(tap, field.dy.data(), W);
    }
  });
  return out;
}

namespace {

void require_same_shape(const Frame& a, const Frame& b, const char* op) {
  if (!a.same_shape(b)) fail_consistency(std::string(op) + ": frame dims differ");
}

}  // namespace

double charbonnier(const Frame& a, const Frame& b, double eps) {
  require_same_shape(a, b, "charbonnier");
  if (!(eps > 0.0)) fail_input("charbonnier: eps must be positive");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double r = a.data[i] - b.data[i];
    sum += std::sqrt(r * r + eps * eps);
  }
  return sum / static_cast<double>(a.data.size());
}

double charbonnier_masked(const Frame& a, const Frame& b, const ValidityMask& mask,
                          double eps) {
  require_same_shape(a, b, "charbonnier_masked");
  if (mask.height != a.height || mask.width != a.width)
    fail_consistency("charbonnier_masked: mask dims differ");
  if (!(eps > 0.0)) fail_input("charbonnier: eps must be positive");
  double sum = 0.0;
  std::size_t n = 0;
  const int C = a.channels;
  for (std::size_t p = 0; p < mask.size(); ++p) {
    if (!mask.values[p]) continue;
    for (int c = 0; c < C; ++c) {
      const double r = a.data[p * C + c] - b.data[p * C + c];
      sum += std::sqrt(r * r + eps * eps);
    }
    n += C;
  }
  return n == 0 ? eps : sum / static_cast<double>(n);
}

Frame luminance(const Frame& img) {
  if (img.channels == 1) return img;
  Frame out(img.height, img.width, 1);
  out.timestamp = img.timestamp;
  out.exposure = img.exposure;
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    out.data[p] = 0.299 * img.data[3 * p] + 0.587 * img.data[3 * p + 1] +
                  0.114 * img.data[3 * p + 2];
  }
  return out;
}

namespace {

double psnr_from_mse(double mse) {
  if (mse <= 0.0) return kPsnrCapDb;
  return std::min(kPsnrCapDb, -10.0 * std::log10(mse));
}

}  // namespace

double psnr(const Frame& a, const Frame& b) {
  require_same_shape(a, b, "psnr");
  const Frame la = luminance(a);
  const Frame lb = luminance(b);
  double sum = 0.0;
  for (std::size_t i = 0; i < la.data.size(); ++i) {
    const double r = la.data[i] - lb.data[i];
    sum += r * r;
  }
  return psnr_from_mse(sum / static_cast<double>(la.data.size()));
}

double psnr_masked(const Frame& a, const Frame& b, const ValidityMask& mask) {
  require_same_shape(a, b, "psnr_masked");
  if (mask.height != a.height || mask.width != a.width)
    fail_consistency("psnr_masked: mask dims differ");
  const Frame la = luminance(a);
  const Frame lb = luminance(b);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < la.data.size(); ++i) {
    if (!mask.values[i]) continue;
    const double r = la.data[i] - lb.data[i];
    sum += r * r;
    ++n;
  }
  if (n == 0) fail_consistency("psnr_masked: empty mask");
  return psnr_from_mse(sum / static_cast<double>(n));
}

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;

std::array<double, kSsimWindow> gaussian_kernel() {
  std::array<double, kSsimWindow> k{};
  double total = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - (kSsimWindow - 1) / 2.0;
    k[i] = std::exp(-(d * d) / (2.0 * kSsimSigma * kSsimSigma));
    total += k[i];
  }
  for (double& v : k) v /= total;
  return k;
}

// Separable Gaussian filter, 'valid' region only.
Plane filter_valid(const Plane& in, const std::array<double, kSsimWindow>& k) {
  const int oh = in.height - kSsimWindow + 1;
  const int ow = in.width - kSsimWindow + 1;
  Plane horiz(in.height, ow);
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) s += k[i] * in.at(y, x + i);
      horiz.at(y, x) = s;
    }
  Plane out(oh, ow);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) s += k[i] * horiz.at(y + i, x);
      out.at(y, x) = s;
    }
  return out;
}

}  // namespace

double ssim(const Frame& a, const Frame& b) {
  require_same_shape(a, b, "ssim");
  if (a.height < kSsimWindow || a.width < kSsimWindow)
    fail_input("ssim: image smaller than the 11x11 window");
  const Frame la = luminance(a);
  const Frame lb = luminance(b);
  const int H = la.height, W = la.width;
  Plane pa(H, W), pb(H, W), paa(H, W), pbb(H, W), pab(H, W);
  for (std::size_t i = 0; i < la.data.size(); ++i) {
    const double x = la.data[i], y = lb.data[i];
    pa.values[i] = x;
    pb.values[i] = y;
    paa.values[i] = x * x;
    pbb.values[i] = y * y;
    pab.values[i] = x * y;
  }
  const auto k = gaussian_kernel();
  const Plane mu_a = filter_valid(pa, k), mu_b = filter_valid(pb, k);
  const Plane s_aa = filter_valid(paa, k), s_bb = filter_valid(pbb, k);
  const Plane s_ab = filter_valid(pab, k);

  constexpr double c1 = (0.01 * 1.0) * (0.01 * 1.0);
  constexpr double c2 = (0.03 * 1.0) * (0.03 * 1.0);
  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a.values[i], mb = mu_b.values[i];
    const double va = s_aa.values[i] - ma * ma;
    const double vb = s_bb.values[i] - mb * mb;
    const double cov = s_ab.values[i] - ma * mb;
    total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
             ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return total / static_cast<double>(mu_a.size());
}

}  // namespace rsevi
