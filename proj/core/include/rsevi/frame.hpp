#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rsevi/exposure_model.hpp"

namespace rsevi {

/// Dense single-valued H x W grid, row-major.
template <typename T>
struct Grid {
  int height = 0;
  int width = 0;
  std::vector<T> values;

  Grid() = default;
  Grid(int h, int w, T fill = T{})
      : height(h), width(w), values(static_cast<std::size_t>(h) * w, fill) {}

  T& at(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }
  const T& at(int y, int x) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  std::size_t size() const noexcept { return values.size(); }
  bool operator==(const Grid&) const = default;
};

using Plane = Grid<double>;
/// 1 where a warp sampled inside the source image bounds, else 0.
using ValidityMask = Grid<std::uint8_t>;

/// Intensity image with values in [0, 1]; channels interleaved per pixel.
struct Frame {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<double> data;
  double timestamp = 0.0;
  std::optional<ExposureModel> exposure;

  Frame() = default;
  Frame(int h, int w, int c = 1, double fill = 0.0);

  double& at(int y, int x, int c = 0) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c = 0) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(height) * width;
  }
  bool same_shape(const Frame& o) const noexcept {
    return height == o.height && width == o.width && channels == o.channels;
  }
};

/// Per-pixel displacement in pixels; x is the column axis, y the row axis.
struct FlowMap {
  int height = 0;
  int width = 0;
  std::vector<double> dx;
  std::vector<double> dy;

  FlowMap() = default;
  FlowMap(int h, int w)
      : height(h), width(w),
        dx(static_cast<std::size_t>(h) * w, 0.0),
        dy(static_cast<std::size_t>(h) * w, 0.0) {}
};

/// Throws if dims are inconsistent or any value is non-finite / outside [0,1].
void validate_frame(const Frame& frame);

/// Bilinear interpolation stencil for one sample position. Positions outside
/// [0, W-1] x [0, H-1] are clamped to the border.
struct BilinearTap {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double fx = 0.0, fy = 0.0;
  bool in_bounds = true;
  bool clamped_x = false;
  bool clamped_y = false;
};

BilinearTap make_tap(double x, double y, int width, int height);

/// Interpolates a row-major plane with `stride` values per pixel at `offset`.
inline double tap_value(const BilinearTap& t, const double* base, int width,
                        int stride = 1, int offset = 0) {
  auto v = [&](int yy, int xx) {
    return base[(static_cast<std::size_t>(yy) * width + xx) * stride + offset];
  };
  return (1.0 - t.fy) * ((1.0 - t.fx) * v(t.y0, t.x0) + t.fx * v(t.y0, t.x1)) +
         t.fy * ((1.0 - t.fx) * v(t.y1, t.x0) + t.fx * v(t.y1, t.x1));
}

/// d(value)/dx and d(value)/dy of the bilinear interpolant; zero along an
/// axis whose coordinate was clamped.
inline std::array<double, 2> tap_gradient(const BilinearTap& t, const double* base,
                                          int width, int stride = 1,
                                          int offset = 0) {
  auto v = [&](int yy, int xx) {
    return base[(static_cast<std::size_t>(yy) * width + xx) * stride + offset];
  };
  const double v00 = v(t.y0, t.x0), v10 = v(t.y0, t.x1);
  const double v01 = v(t.y1, t.x0), v11 = v(t.y1, t.x1);
  const double gx = t.clamped_x ? 0.0 : (1.0 - t.fy) * (v10 - v00) + t.fy * (v11 - v01);
  const double gy = t.clamped_y ? 0.0 : (1.0 - t.fx) * (v01 - v00) + t.fx * (v11 - v10);
  return {gx, gy};
}

/// Bilinear sample of every channel at (x, y) with replicate padding.
/// Entries beyond img.channels are zero.
std::array<double, 3> bilinear_sample(const Frame& img, double x, double y);

/// out(p) = src(p + flow(p)); mask(p) = 1 iff p + flow(p) lies inside the
/// image before clamping.
struct WarpResult {
  Frame image;
  ValidityMask mask;
};
WarpResult warp_backward(const Frame& src, const FlowMap& flow);

/// Backward-warps both components of a flow field by another flow.
FlowMap warp_flow(const FlowMap& field, const FlowMap& by);

inline constexpr double kDefaultCharbonnierEps = 1e-3;
inline constexpr double kPsnrCapDb = 99.0;

/// Mean of sqrt((a-b)^2 + eps^2) over all pixels and channels.
double charbonnier(const Frame& a, const Frame& b, double eps = kDefaultCharbonnierEps);

/// Same mean restricted to pixels with mask == 1. Returns eps when no pixel
/// is valid.
double charbonnier_masked(const Frame& a, const Frame& b, const ValidityMask& mask,
                          double eps = kDefaultCharbonnierEps);

/// 0.299 R + 0.587 G + 0.114 B; single-channel frames are returned as is.
Frame luminance(const Frame& img);

/// PSNR on luminance with peak 1. Identical inputs give kPsnrCapDb.
double psnr(const Frame& a, const Frame& b);
/// PSNR over pixels where mask == 1.
double psnr_masked(const Frame& a, const Frame& b, const ValidityMask& mask);

/// Mean SSIM (11x11 Gaussian window, sigma 1.5, K1 0.01, K2 0.03, range 1)
/// over all fully-contained windows of the luminance images.
double ssim(const Frame& a, const Frame& b);

}  // namespace rsevi
