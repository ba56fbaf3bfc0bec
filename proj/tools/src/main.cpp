// rsevi: simulate RS frames and events, reconstruct GS video, evaluate.
#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "rsevi/error.hpp"
#include "rsevi/parallel.hpp"

namespace {

int exit_code(rsevi::ErrorKind kind) {
  switch (kind) {
    case rsevi::ErrorKind::kInput: return 2;
    case rsevi::ErrorKind::kConsistency: return 3;
    case rsevi::ErrorKind::kNumeric: return 4;
  }
  return 2;
}

void apply_threads(int requested) {
  int n = requested;
  if (const char* env = std::getenv("RSEVI_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) rsevi::fail_input("RSEVI_THREADS must be a positive integer");
    n = static_cast<int>(v);
  }
  rsevi::set_thread_count(n);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace rsevi::cli;

  CLI::App app{"Rolling-shutter + event video reconstruction"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "Worker threads (RSEVI_THREADS overrides)")
      ->check(CLI::PositiveNumber);
  std::uint64_t seed = 0;
  bool seed_given = false;
  app.add_option_function<std::uint64_t>(
      "--seed", [&](std::uint64_t s) { seed = s; seed_given = true; },
      "Seed recorded in outputs and used by randomized steps");

  SynthOptions synth;
  auto* c_synth = app.add_subcommand("synth", "Render the procedural translation scene");
  c_synth->fallthrough();
  c_synth->add_option("--out", synth.out_dir, "Output directory")->required();
  c_synth->add_option("--height", synth.height);
  c_synth->add_option("--width", synth.width);
  c_synth->add_option("--vx", synth.vx, "px per RS frame period");
  c_synth->add_option("--vy", synth.vy, "px per RS frame period");
  c_synth->add_option("--fps", synth.fps, "GS frame rate");
  c_synth->add_option("--frames", synth.frames, "Frames from t = 0 (0 = auto)");
  c_synth->add_option("--warmup", synth.warmup, "Fade-in frames before t = 0 (-1 = height)");
  c_synth->add_option("--times", synth.times_csv, "Render at the times in an index,t CSV");

  SimulateOptions sim;
  auto* c_sim = app.add_subcommand("simulate", "GS frames -> RS frames + events");
  c_sim->fallthrough();
  c_sim->add_option("--frames", sim.frames_dir, "Directory of GS frames")->required();
  c_sim->add_option("--fps", sim.fps, "GS frame rate")->required();
  c_sim->add_option("--out", sim.out_dir, "Output directory")->required();
  c_sim->add_option("--threshold", sim.threshold, "Contrast threshold C");
  c_sim->add_option("--log-eps", sim.log_eps);
  c_sim->add_option("--readout", sim.readout, "RS readout time (s)");
  c_sim->add_option("--interval", sim.interval, "RS frame interval (s)");
  c_sim->add_option("--rs-start", sim.rs_start, "Start time of the first RS frame");
  c_sim->add_option("--motion", sim.motion_json, "Motion script for oracle fields");
  c_sim->add_option("--T", sim.bins, "Displacement bins for oracle fields");

  InterpolateOptions interp;
  std::string weightmap = "analytic";
  std::vector<double> win0, win1;
  auto* c_int = app.add_subcommand("interpolate", "Two RS frames + events -> K GS frames");
  c_int->fallthrough();
  c_int->add_option("--manifest", interp.manifest);
  c_int->add_option("--pair", interp.pair, "Index of the first RS frame in the manifest");
  c_int->add_option("--rs0", interp.rs0);
  c_int->add_option("--rs1", interp.rs1);
  c_int->add_option("--events", interp.events);
  c_int->add_option("--rs0-window", win0, "t_start t_end")->expected(2);
  c_int->add_option("--rs1-window", win1, "t_start t_end")->expected(2);
  c_int->add_option("--init-field", interp.init_field, "DFB1 field replacing the classical estimate");
  c_int->add_option("--gt", interp.gt_dir, "Ground-truth frames for evaluation");
  c_int->add_option("--margin", interp.margin, "Border excluded from ground-truth metrics");
  c_int->add_option("--out", interp.out_dir, "Output directory")->required();
  c_int->add_option("--factor", interp.factor, "Frames K to generate");
  c_int->add_option("--T", interp.bins);
  c_int->add_option("--subbins", interp.subbins);
  c_int->add_option("--sh", interp.weight_maps.samples_h);
  c_int->add_option("--st", interp.weight_maps.samples_t);
  c_int->add_option("--weightmap", weightmap)->check(CLI::IsMember({"analytic", "sampled"}));
  c_int->add_option("--lambda-f", interp.weights.lambda_f);
  c_int->add_option("--lambda-rs", interp.weights.lambda_rs);
  c_int->add_option("--lambda-gs", interp.weights.lambda_gs);
  c_int->add_option("--iters", interp.optimizer.max_iters, "Optimizer iterations (0 = none)");
  c_int->add_option("--step", interp.optimizer.step_size, "Initial step (px)");

  EvaluateOptions eval;
  auto* c_eval = app.add_subcommand("evaluate", "PSNR / SSIM of predictions vs ground truth");
  c_eval->fallthrough();
  c_eval->add_option("--pred", eval.pred_dir)->required();
  c_eval->add_option("--gt", eval.gt_dir)->required();
  c_eval->add_option("--margin", eval.margin, "Border excluded from the metrics");
  c_eval->add_option("--out", eval.out_csv, "CSV path (default stdout)");

  BandwidthOptions bw;
  auto* c_bw = app.add_subcommand("bandwidth", "Raw parameter counts and reduction ratio");
  c_bw->fallthrough();
  c_bw->add_option("--events", bw.events)->required();
  c_bw->add_option("--rs-fps", bw.rs_fps)->required();
  c_bw->add_option("--target-fps", bw.target_fps)->required();
  c_bw->add_option("--seconds", bw.seconds, "Duration (default: stream span)");
  c_bw->add_option("--out", bw.out_json, "JSON path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    apply_threads(threads);
    if (c_synth->parsed()) {
      if (seed_given) synth.seed = seed;
      cmd_synth(synth);
    } else if (c_sim->parsed()) {
      if (seed_given) sim.seed = seed;
      cmd_simulate(sim);
    } else if (c_int->parsed()) {
      interp.weight_maps.mode =
          weightmap == "sampled" ? rsevi::WeightMapMode::kSampled : rsevi::WeightMapMode::kAnalytic;
      if (!win0.empty()) interp.rs0_window = std::pair{win0[0], win0[1]};
      if (!win1.empty()) interp.rs1_window = std::pair{win1[0], win1[1]};
      interp.optimizer.seed = seed;
      if (interp.optimizer.max_iters < 0) rsevi::fail_input("--iters must be >= 0");
      cmd_interpolate(interp);
    } else if (c_eval->parsed()) {
      cmd_evaluate(eval);
    } else if (c_bw->parsed()) {
      cmd_bandwidth(bw);
    }
  } catch (const rsevi::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
