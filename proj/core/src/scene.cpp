#include "rsevi/scene.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "rsevi/error.hpp"
#include "rsevi/reconstruction.hpp"

namespace rsevi {

namespace {
constexpr double kContrast = 2.5;
}  // namespace

TranslationScene::TranslationScene(int height, int width, double vx, double vy,
                                   std::uint64_t seed)
    : height_(height), width_(width), vx_(vx), vy_(vy) {
  if (height < 1 || width < 1) fail_input("scene dims must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr int kWaves = 8;
  double total_amp = 0.0;
  for (int k = 0; k < kWaves; ++k) {
    const double wavelength = 10.0 + 14.0 * unit(rng);
    // Stratified orientations keep the texture roughly isotropic.
    const double angle = std::numbers::pi * (k + unit(rng)) / kWaves;
    const double freq = 2.0 * std::numbers::pi / wavelength;
    Wave w{freq * std::cos(angle), freq * std::sin(angle),
           2.0 * std::numbers::pi * unit(rng), 0.5 + unit(rng)};
    total_amp += w.amplitude;
    waves_.push_back(w);
  }
  for (Wave& w : waves_) w.amplitude /= total_amp;
}

double TranslationScene::intensity(double x, double y, double t) const {
  const double u = x - vx_ * t;
  const double v = y - vy_ * t;
  double s = 0.0;
  for (const Wave& w : waves_) s += w.amplitude * std::sin(w.kx * u + w.ky * v + w.phase);
  // |s| <= 1; the squashing raises contrast while keeping values in (0.1, 0.9).
  return 0.5 + 0.4 * std::tanh(kContrast * s);
}

Frame TranslationScene::render(double t) const {
  Frame f(height_, width_, 1);
  f.timestamp = t;
  f.exposure = ExposureModel::global(t, height_);
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x) f.at(y, x) = intensity(x, y, t);
  return f;
}

std::vector<Frame> render_capture(const TranslationScene& scene, double fps, int k_first,
                                  int k_last, int fade_frames) {
  if (!(fps > 0.0) || k_last <= k_first) fail_input("render_capture: empty frame range");
  std::vector<Frame> frames;
  frames.reserve(static_cast<std::size_t>(k_last - k_first + 1));
  for (int k = k_first; k <= k_last; ++k) {
    Frame f = scene.render(k / fps);
    if (k - k_first < fade_frames) {
      const double alpha = static_cast<double>(k - k_first) / fade_frames;
      for (double& v : f.data) v = 0.5 + alpha * (v - 0.5);
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

SyntheticPair make_synthetic_pair(const SyntheticPairSpec& spec) {
  const int H = spec.height;
  const double row_dt = 1.0 / spec.gs_fps;
  const double frame_period = H * row_dt;
  const double vx = spec.vx_px_per_frame / frame_period;
  const double vy = spec.vy_px_per_frame / frame_period;

  const ExposureModel e0 = ExposureModel::rolling(0.0, (H - 1) * row_dt, H);
  const ExposureModel e1 = ExposureModel::rolling(H * row_dt, (2 * H - 1) * row_dt, H);
  const TimeBins bins = pair_window(e0, e1, spec.bins);

  TranslationScene scene(H, spec.width, vx, vy, spec.seed);

  // Dense GS frames covering the voxel-grid window [t0 - delta/2, t1 + delta/2]
  // after a warm-up of one RS period.
  const double margin = 0.5 * bins.width();
  const int k_lo = static_cast<int>(std::floor((bins.t0() - margin - frame_period) / row_dt));
  const int k_hi = static_cast<int>(std::ceil((bins.t1() + margin) / row_dt)) + 1;
  std::vector<Frame> gs = render_capture(scene, spec.gs_fps, k_lo, k_hi, H / 2);

  Frame rs0 = synthesize_rs(gs, e0);
  Frame rs1 = synthesize_rs(gs, e1);
  EventStream events = crop_events(simulate_events(gs, spec.threshold, spec.log_eps),
                                   bins.t0() - margin, bins.t1() + margin);

  return SyntheticPair{std::move(scene), e0, e1, bins, std::move(rs0), std::move(rs1),
                       std::move(gs), std::move(events)};
}

}  // namespace rsevi
