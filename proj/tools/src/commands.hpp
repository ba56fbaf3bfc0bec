#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "rsevi/reconstruction.hpp"
#include "rsevi/self_supervision.hpp"

namespace rsevi::cli {

/// Renders the procedural translation scene as a dense GS sequence (with a
/// fade-in warm-up at negative times), or at the times listed in a CSV.
struct SynthOptions {
  std::string out_dir;
  int height = 64;
  int width = 64;
  double vx = 3.0;  ///< px per RS frame period (height GS frames)
  double vy = 1.0;
  double fps = 1920.0;
  int frames = 0;   ///< frames from t = 0; 0 picks enough for two RS frames
  int warmup = -1;  ///< frames before t = 0; -1 picks height
  std::uint64_t seed = 1;
  std::optional<std::string> times_csv;
};

struct SimulateOptions {
  std::string frames_dir;
  std::string out_dir;
  double fps = 0.0;
  double threshold = 0.3;
  double log_eps = 1e-3;
  std::optional<double> readout;   ///< s from first to last row; default (H-1)/fps
  std::optional<double> interval;  ///< s between RS frame starts; default H/fps
  std::optional<double> rs_start;  ///< default: first frame's timestamp
  std::optional<std::string> motion_json;
  int bins = 6;
  std::optional<std::uint64_t> seed;
};

struct InterpolateOptions {
  std::optional<std::string> manifest;
  int pair = 0;
  std::optional<std::string> rs0, rs1, events;
  std::optional<std::pair<double, double>> rs0_window, rs1_window;
  std::optional<std::string> init_field;
  std::optional<std::string> gt_dir;
  int margin = 0;  ///< border excluded from ground-truth metrics
  std::string out_dir;
  int factor = 4;
  int bins = 6;
  int subbins = 5;
  WeightMapSettings weight_maps;
  LossWeights weights;
  OptimizerConfig optimizer;
};

struct EvaluateOptions {
  std::string pred_dir;
  std::string gt_dir;
  int margin = 0;  ///< border excluded from the metrics
  std::optional<std::string> out_csv;
};

struct BandwidthOptions {
  std::string events;
  double rs_fps = 0.0;
  double target_fps = 0.0;
  std::optional<double> seconds;  ///< default: the stream's duration
  std::optional<std::string> out_json;
};

// Each command throws rsevi::Error on failure.
void cmd_synth(const SynthOptions& opt);
void cmd_simulate(const SimulateOptions& opt);
void cmd_interpolate(const InterpolateOptions& opt);
void cmd_evaluate(const EvaluateOptions& opt);
void cmd_bandwidth(const BandwidthOptions& opt);

}  // namespace rsevi::cli
