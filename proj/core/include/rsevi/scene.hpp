#pragma once

#include <cstdint>
#include <vector>

#include "rsevi/displacement_field.hpp"
#include "rsevi/events.hpp"
#include "rsevi/frame.hpp"

namespace rsevi {

/// Smooth procedural texture (squashed sum of plane waves, values in (0.1, 0.9))
/// translating at constant velocity. Rendering is exact at any time.
class TranslationScene {
 public:
  TranslationScene(int height, int width, double vx, double vy, std::uint64_t seed);

  double intensity(double x, double y, double t) const;
  Frame render(double t) const;
  MotionModel motion() const { return Translation{vx_, vy_}; }
  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }

 private:
  struct Wave {
    double kx, ky, phase, amplitude;
  };
  int height_;
  int width_;
  double vx_;
  double vy_;
  std::vector<Wave> waves_;
};

/// GS frames at k / fps for k in [k_first, k_last]. The first fade_frames
/// frames blend linearly from uniform grey into the texture, so a simulated
/// event sensor starts with the same log reference at every pixel.
std::vector<Frame> render_capture(const TranslationScene& scene, double fps, int k_first,
                                  int k_last, int fade_frames);

/// Synthetic rolling-shutter capture of a TranslationScene. Rows are read
/// out one per GS frame period (row interval 1 / gs_fps), frame r0 starts at
/// t = 0 and r1 starts H rows later. The dense GS sequence starts one RS
/// period before the displacement-field window (with a fade-in over the
/// first H/2 frames) and ends after it.
struct SyntheticPairSpec {
  int height = 64;
  int width = 64;
  double vx_px_per_frame = 3.0;  ///< displacement per RS frame period
  double vy_px_per_frame = 0.0;
  double gs_fps = 1920.0;
  double threshold = 0.3;
  double log_eps = kDefaultLogEps;
  int bins = 6;
  int subbins = kDefaultSubbins;
  std::uint64_t seed = 1;
};

struct SyntheticPair {
  TranslationScene scene;
  ExposureModel exposure0;
  ExposureModel exposure1;
  TimeBins bins;
  Frame rs0;
  Frame rs1;
  std::vector<Frame> gs_frames;  ///< dense GS frames at k / gs_fps
  EventStream events;            ///< simulated from gs_frames, cropped to the voxel window
};

SyntheticPair make_synthetic_pair(const SyntheticPairSpec& spec);

}  // namespace rsevi
