#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "rsevi/events.hpp"
#include "rsevi/exposure.hpp"

namespace rsevi {

/// Piecewise-linear motion over [t0, t1]: entry (c, i, h, w) is the
/// displacement (c = 0 column, c = 1 row; pixels) of the content at pixel
/// (h, w) between bin boundaries tau_i and tau_{i+1}.
struct DisplacementField {
  TimeBins bins;
  int height = 0;
  int width = 0;
  std::vector<double> values;  // [component][bin][row][col]

  DisplacementField() = default;
  DisplacementField(const TimeBins& b, int h, int w)
      : bins(b), height(h), width(w),
        values(static_cast<std::size_t>(2) * b.count() * h * w, 0.0) {}

  int bin_count() const noexcept { return bins.count(); }
  std::size_t plane_size() const noexcept { return static_cast<std::size_t>(height) * width; }
  std::size_t index(int c, int i, int h, int w) const noexcept {
    return ((static_cast<std::size_t>(c) * bins.count() + i) * height + h) * width + w;
  }
  double& at(int c, int i, int h, int w) { return values[index(c, i, h, w)]; }
  double at(int c, int i, int h, int w) const { return values[index(c, i, h, w)]; }
};

/// Ground-truth motion used by the simulator and test oracles.
struct Translation {
  double vx = 0.0;  ///< px / s
  double vy = 0.0;
};

/// Velocity field v(p) = A (p - c) + b about the image centre c, integrated
/// exactly over each bin (matrix exponential).
struct AffineMotion {
  std::array<double, 4> a{0.0, 0.0, 0.0, 0.0};  ///< row-major 2x2, 1/s
  std::array<double, 2> b{0.0, 0.0};            ///< px / s
};

/// Uniform per-bin displacement table (px per bin).
struct ScriptedMotion {
  std::vector<std::array<double, 2>> per_bin;
};

using MotionModel = std::variant<Translation, AffineMotion, ScriptedMotion>;

/// p0 plus the sum of the field's displacements in bins [i0, i0 + n), all
/// sampled (bilinearly) at p0.
std::array<double, 2> compose_trajectory(const DisplacementField& field,
                                         std::array<double, 2> p0, int i0, int n);

/// (1/T) * sum over bins of the per-pixel mean of squared forward
/// differences along x and y, summed over both components.
double smoothness_loss(const DisplacementField& field);
/// Gradient of smoothness_loss, shaped like field.values.
std::vector<double> smoothness_gradient(const DisplacementField& field);

DisplacementField oracle_field(const MotionModel& model, const TimeBins& bins,
                               int height, int width);

/// Displacement of the point p (absolute pixel coordinates) after moving
/// for `duration` seconds under the model. Scripted models are not
/// continuous-time and are rejected.
std::array<double, 2> motion_displacement(const MotionModel& model, std::array<double, 2> p,
                                          double duration, int height, int width);

/// Classical (non-learned) estimate: dense pyramidal Lucas-Kanade between
/// consecutive absolute event images.
DisplacementField estimate_field_classical(const VoxelGrid& grid);

/// DFB1: "DFB1", u32 T, H, W, f64 t0, t1, f32 data [component][bin][row][col].
std::vector<std::uint8_t> encode_dfb(const DisplacementField& field);
DisplacementField decode_dfb(std::vector<std::uint8_t> bytes,
                             const std::string& origin = "<memory>");
void write_dfb(const DisplacementField& field, const std::string& path);
DisplacementField read_dfb(const std::string& path);

}  // namespace rsevi
