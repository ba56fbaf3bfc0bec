#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"
#include "manifest.hpp"
#include "rsevi/bandwidth.hpp"
#include "rsevi/error.hpp"
#include "rsevi/frame_io.hpp"
#include "rsevi/scene.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace rsevi::cli {

namespace {

std::string numbered(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%04zu", prefix, i);
  return buf;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) fail_input("cannot create output directory: " + dir);
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

// Frame files in a directory, sorted by name. When a stem exists as both
// FRM1 and PNM, the lossless FRM1 copy wins.
std::vector<fs::path> list_frames(const std::string& dir) {
  if (!fs::is_directory(dir)) fail_input("not a directory: " + dir);
  std::map<std::string, fs::path> by_stem;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext != ".frm" && ext != ".pgm" && ext != ".ppm") continue;
    const std::string stem = entry.path().stem().string();
    auto it = by_stem.find(stem);
    if (it == by_stem.end() || ext == ".frm") by_stem[stem] = entry.path();
  }
  std::vector<fs::path> out;
  for (auto& [stem, path] : by_stem) out.push_back(path);
  if (out.empty()) fail_input("no frames (.frm/.pgm/.ppm) in " + dir);
  return out;
}

void write_frame_files(const Frame& f, const std::string& dir, const std::string& stem) {
  write_frm(f, join(dir, stem + ".frm"));
  write_pnm(f, join(dir, stem + (f.channels == 3 ? ".ppm" : ".pgm")));
}

void write_json(const ordered_json& j, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail_input("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

ordered_json loss_json(const LossBreakdown& b) {
  return {{"total", b.total}, {"field", b.field}, {"rs2rs", b.rs2rs}, {"gs2rs", b.gs2rs}};
}

MotionModel load_motion(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_input("cannot open: " + path);
  try {
    const auto j = ordered_json::parse(in);
    const std::string type = j.at("type").get<std::string>();
    if (type == "translation")
      return Translation{j.at("vx").get<double>(), j.at("vy").get<double>()};
    if (type == "affine") {
      AffineMotion m;
      m.a = j.at("a").get<std::array<double, 4>>();
      m.b = j.at("b").get<std::array<double, 2>>();
      return m;
    }
    fail_input("unknown motion type '" + type + "' in " + path);
  } catch (const nlohmann::json::exception& e) {
    fail_input("malformed motion script " + path + ": " + e.what());
  }
}

std::vector<double> read_times_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_input("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "index,t") fail_input("missing CSV header in " + path);
  std::vector<double> times;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::size_t idx = 0;
    char comma = 0;
    double t = 0.0;
    if (!(row >> idx >> comma >> t) || comma != ',') fail_input("malformed row in " + path);
    times.push_back(t);
  }
  if (times.empty()) fail_input("no times in " + path);
  return times;
}

// Drops a border of `margin` pixels on every side.
Frame crop(const Frame& f, int margin) {
  if (margin == 0) return f;
  if (margin < 0 || 2 * margin >= f.height || 2 * margin >= f.width)
    fail_input("evaluation margin leaves no pixels");
  Frame out(f.height - 2 * margin, f.width - 2 * margin, f.channels);
  out.timestamp = f.timestamp;
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < f.channels; ++c) out.at(y, x, c) = f.at(y + margin, x + margin, c);
  return out;
}

bool has_magic(const std::string& path, const char* magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_input("cannot open: " + path);
  char buf[4] = {};
  in.read(buf, 4);
  return in.gcount() == 4 && std::equal(buf, buf + 4, magic);
}

}  // namespace

void cmd_synth(const SynthOptions& opt) {
  if (opt.height < 2 || opt.width < 1 || !(opt.fps > 0.0)) fail_input("synth: invalid geometry");
  ensure_dir(opt.out_dir);
  const double period = opt.height / opt.fps;
  const TranslationScene scene(opt.height, opt.width, opt.vx / period, opt.vy / period, opt.seed);

  if (opt.times_csv) {
    const std::vector<double> times = read_times_csv(*opt.times_csv);
    for (std::size_t j = 0; j < times.size(); ++j)
      write_frame_files(scene.render(times[j]), opt.out_dir, numbered("gs", j));
    return;
  }

  const int warmup = opt.warmup < 0 ? opt.height : opt.warmup;
  const int frames = opt.frames > 0 ? opt.frames : 2 * opt.height + opt.height / 2 + 1;
  const std::vector<Frame> seq = render_capture(scene, opt.fps, -warmup, frames - 1, warmup / 2);
  for (std::size_t k = 0; k < seq.size(); ++k)
    write_frame_files(seq[k], opt.out_dir, numbered("gs", k));

  const auto motion = std::get<Translation>(scene.motion());
  write_json({{"type", "translation"}, {"vx", motion.vx}, {"vy", motion.vy}},
             join(opt.out_dir, "motion.json"));
}

void cmd_simulate(const SimulateOptions& opt) {
  if (!(opt.fps > 0.0)) fail_input("simulate: --fps must be positive");
  const std::vector<fs::path> files = list_frames(opt.frames_dir);
  if (files.size() < 2) fail_input("simulate: need at least two frames");

  // FRM1 frames keep their stored timestamps; PNM frames are placed at k / fps.
  std::vector<Frame> frames;
  frames.reserve(files.size());
  for (std::size_t k = 0; k < files.size(); ++k) {
    Frame f = read_frame(files[k].string());
    if (files[k].extension() != ".frm") f.timestamp = static_cast<double>(k) / opt.fps;
    f.exposure.reset();
    frames.push_back(std::move(f));
  }
  const int H = frames[0].height;
  const double readout = opt.readout.value_or((H - 1) / opt.fps);
  const double interval = opt.interval.value_or(H / opt.fps);
  const double start = opt.rs_start.value_or(frames.front().timestamp);
  if (!(readout > 0.0) || !(interval > 0.0)) fail_input("simulate: RS timing must be positive");

  ensure_dir(opt.out_dir);
  const EventStream events = simulate_events(frames, opt.threshold, opt.log_eps);
  write_evs(events, join(opt.out_dir, "events.evs"));

  Manifest m;
  m.gs_fps = opt.fps;
  m.height = H;
  m.width = frames[0].width;
  m.channels = frames[0].channels;
  m.threshold = opt.threshold;
  m.log_eps = opt.log_eps;
  m.rs_fps = opt.interval ? 1.0 / interval : rs_effective_frame_rate(opt.fps, H);
  m.rs_readout = readout;
  m.rs_interval = interval;
  m.events_file = "events.evs";
  m.event_count = events.events.size();
  m.events_t_begin = events.t_begin;
  m.events_t_end = events.t_end;
  m.seed = opt.seed;

  const double last = frames.back().timestamp;
  const double slack = 1e-9 * std::max(1.0, std::abs(last));
  std::vector<ExposureModel> exposures;
  for (std::size_t j = 0;; ++j) {
    const double ts = start + static_cast<double>(j) * interval;
    if (ts + readout > last + slack) break;
    const ExposureModel model = ExposureModel::rolling(ts, ts + readout, H);
    const Frame rs = synthesize_rs(frames, model);
    const std::string stem = numbered("rs", j);
    write_frame_files(rs, opt.out_dir, stem);
    m.rs_frames.push_back({stem + ".frm", stem + (rs.channels == 3 ? ".ppm" : ".pgm"), ts,
                           ts + readout});
    exposures.push_back(model);
  }
  if (exposures.empty()) fail_input("simulate: sequence too short for one RS frame");

  if (opt.motion_json) {
    const MotionModel motion = load_motion(*opt.motion_json);
    for (std::size_t j = 0; j + 1 < exposures.size(); ++j) {
      const TimeBins bins = pair_window(exposures[j], exposures[j + 1], opt.bins);
      const std::string name = numbered("field", j) + ".dfb";
      write_dfb(oracle_field(motion, bins, H, m.width), join(opt.out_dir, name));
      m.fields.push_back({name, static_cast<int>(j), opt.bins});
    }
  }
  save_manifest(m, join(opt.out_dir, "manifest.json"));
}

void cmd_interpolate(const InterpolateOptions& opt) {
  // Resolve inputs: the manifest supplies defaults, explicit flags override.
  std::string rs0_path, rs1_path, events_path;
  std::optional<std::pair<double, double>> w0 = opt.rs0_window, w1 = opt.rs1_window;
  if (opt.manifest) {
    const Manifest m = load_manifest(*opt.manifest);
    const fs::path base = fs::path(*opt.manifest).parent_path();
    if (opt.pair < 0 || static_cast<std::size_t>(opt.pair) + 1 >= m.rs_frames.size())
      fail_input("interpolate: manifest has no RS pair " + std::to_string(opt.pair));
    const RsFrameEntry& a = m.rs_frames[static_cast<std::size_t>(opt.pair)];
    const RsFrameEntry& b = m.rs_frames[static_cast<std::size_t>(opt.pair) + 1];
    rs0_path = (base / a.frm).string();
    rs1_path = (base / b.frm).string();
    events_path = (base / m.events_file).string();
    if (!w0) w0 = std::pair{a.t_start, a.t_end};
    if (!w1) w1 = std::pair{b.t_start, b.t_end};
  }
  if (opt.rs0) rs0_path = *opt.rs0;
  if (opt.rs1) rs1_path = *opt.rs1;
  if (opt.events) events_path = *opt.events;
  if (rs0_path.empty() || rs1_path.empty() || events_path.empty() || !w0 || !w1)
    fail_input("interpolate: need --manifest or all of --rs0/--rs1/--events and both windows");

  Frame rs0 = read_frame(rs0_path);
  Frame rs1 = read_frame(rs1_path);
  rs0.exposure = ExposureModel::rolling(w0->first, w0->second, rs0.height);
  rs1.exposure = ExposureModel::rolling(w1->first, w1->second, rs1.height);
  rs0.timestamp = w0->first;
  rs1.timestamp = w1->first;
  if (!rs0.same_shape(rs1)) fail_consistency("interpolate: RS frames differ in shape");
  if (!(w0->second > w0->first) || !(w1->second > w1->first))
    fail_consistency("interpolate: RS windows must have t_end > t_start");
  if (w1->first < w0->second)
    fail_consistency("interpolate: rs1 window starts before rs0 finishes readout");

  EventStream stream;
  if (has_magic(events_path, "EVS1")) {
    stream = read_evs(events_path);
  } else if (fs::path(events_path).extension() == ".csv") {
    stream = read_events_csv(events_path, rs0.width, rs0.height,
                             std::numeric_limits<double>::lowest(),
                             std::numeric_limits<double>::max());
  } else {
    fail_input("unrecognized event file: " + events_path);
  }
  if (stream.width != rs0.width || stream.height != rs0.height)
    fail_consistency("interpolate: event sensor size differs from the RS frames");

  const TimeBins bins = pair_window(*rs0.exposure, *rs1.exposure, opt.bins);
  const double half = 0.5 * bins.width();
  if (!stream.events.empty() &&
      (stream.events.back().t < bins.t0() || stream.events.front().t > bins.t1()))
    fail_consistency("interpolate: events do not overlap the RS exposure window");
  const VoxelGrid grid =
      voxelize(crop_events(stream, bins.t0() - half, bins.t1() + half), bins, opt.subbins);

  DisplacementField init;
  if (opt.init_field) {
    init = read_dfb(*opt.init_field);
    if (init.height != rs0.height || init.width != rs0.width ||
        init.bins.count() != bins.count() ||
        std::abs(init.bins.t0() - bins.t0()) > 1e-9 * std::max(1.0, std::abs(bins.t0())) ||
        std::abs(init.bins.t1() - bins.t1()) > 1e-9 * std::max(1.0, std::abs(bins.t1())))
      fail_consistency("interpolate: --init-field does not match the RS pair window");
    init.bins = bins;
  } else {
    init = estimate_field_classical(grid);
  }

  FramePairContext ctx{rs0, rs1, init, opt.weight_maps};
  ctx.validate();

  OptimizationResult result;
  if (opt.optimizer.max_iters > 0) {
    result = optimize_field(ctx, init, opt.weights, opt.optimizer);
  } else {
    const auto times = interpolation_times(ctx, std::max(2, opt.optimizer.latent_count));
    result.field = init;
    result.trace.push_back(
        {0, total_loss(ctx, opt.weights, times, opt.optimizer.charbonnier_eps), 0.0});
  }
  ctx.field = result.field;

  ensure_dir(opt.out_dir);
  const std::vector<double> times = interpolation_times(ctx, opt.factor);
  std::vector<Frame> outputs;
  ordered_json frames_json = ordered_json::array();
  std::ofstream ts_out(join(opt.out_dir, "timestamps.csv"), std::ios::trunc);
  if (!ts_out) fail_input("cannot write timestamps.csv in " + opt.out_dir);
  ts_out << "index,t\n" << std::setprecision(17);
  for (std::size_t j = 0; j < times.size(); ++j) {
    const auto t_begin = std::chrono::steady_clock::now();
    LatentFrame latent = synthesize_gs(ctx, times[j]);
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_begin)
            .count();
    // Wall time goes to the log only so that output files stay reproducible.
    std::cerr << "frame " << j << " t=" << times[j] << " wall_ms=" << ms << '\n';
    latent.image.timestamp = times[j];
    latent.image.exposure = ExposureModel::global(times[j], latent.image.height);
    const std::string stem = numbered("gs", j);
    write_frame_files(latent.image, opt.out_dir, stem);
    ts_out << j << ',' << times[j] << '\n';
    frames_json.push_back({{"file", stem + ".frm"}, {"t", times[j]}});
    outputs.push_back(std::move(latent.image));
  }
  write_trace_csv(result.trace, join(opt.out_dir, "trace.csv"));
  write_dfb(result.field, join(opt.out_dir, "field.dfb"));

  ordered_json report;
  report["factor"] = opt.factor;
  report["bins"] = opt.bins;
  report["subbins"] = opt.subbins;
  report["weightmap"] =
      opt.weight_maps.mode == WeightMapMode::kAnalytic ? "analytic" : "sampled";
  report["lambda"] = {{"field", opt.weights.lambda_f},
                      {"rs2rs", opt.weights.lambda_rs},
                      {"gs2rs", opt.weights.lambda_gs}};
  report["iterations"] = result.trace.size() - 1;
  report["converged"] = result.converged;
  report["loss_initial"] = loss_json(result.trace.front().loss);
  report["loss_final"] = loss_json(result.trace.back().loss);
  report["event_count"] = stream.events.size();
  report["frames"] = frames_json;

  if (opt.gt_dir) {
    const std::vector<fs::path> gt = list_frames(*opt.gt_dir);
    if (gt.size() != outputs.size())
      fail_consistency("interpolate: ground-truth frame count differs from --factor");
    ordered_json per = ordered_json::array();
    double psnr_sum = 0.0, ssim_sum = 0.0;
    for (std::size_t j = 0; j < gt.size(); ++j) {
      const Frame g = crop(read_frame(gt[j].string()), opt.margin);
      const Frame o = crop(outputs[j], opt.margin);
      if (!o.same_shape(g)) fail_consistency("interpolate: ground-truth frame size differs");
      const double p = psnr(o, g);
      const double s = ssim(o, g);
      psnr_sum += p;
      ssim_sum += s;
      per.push_back({{"file", gt[j].filename().string()}, {"psnr", p}, {"ssim", s}});
    }
    const double n = static_cast<double>(gt.size());
    report["evaluation"] = {{"margin", opt.margin},
                            {"frames", per},
                            {"mean_psnr", psnr_sum / n},
                            {"mean_ssim", ssim_sum / n}};
  }
  write_json(report, join(opt.out_dir, "report.json"));
}

void cmd_evaluate(const EvaluateOptions& opt) {
  const std::vector<fs::path> pred = list_frames(opt.pred_dir);
  const std::vector<fs::path> gt = list_frames(opt.gt_dir);
  if (pred.size() != gt.size())
    fail_consistency("evaluate: " + std::to_string(pred.size()) + " predictions vs " +
                     std::to_string(gt.size()) + " ground-truth frames");

  std::ostringstream csv;
  csv << std::setprecision(10) << "frame,psnr,ssim\n";
  double psnr_sum = 0.0, ssim_sum = 0.0;
  for (std::size_t j = 0; j < pred.size(); ++j) {
    const Frame a = crop(read_frame(pred[j].string()), opt.margin);
    const Frame b = crop(read_frame(gt[j].string()), opt.margin);
    if (a.height != b.height || a.width != b.width)
      fail_consistency("evaluate: frame size differs for " + pred[j].filename().string());
    const double p = psnr(a, b);
    const double s = ssim(a, b);
    psnr_sum += p;
    ssim_sum += s;
    csv << pred[j].stem().string() << ',' << p << ',' << s << '\n';
  }
  const double n = static_cast<double>(pred.size());
  csv << "mean," << psnr_sum / n << ',' << ssim_sum / n << '\n';

  if (opt.out_csv) {
    std::ofstream out(*opt.out_csv, std::ios::trunc);
    if (!out) fail_input("cannot open for writing: " + *opt.out_csv);
    out << csv.str();
  } else {
    std::cout << csv.str();
  }
}

void cmd_bandwidth(const BandwidthOptions& opt) {
  if (!has_magic(opt.events, "EVS1")) fail_input("bandwidth: expected an EVS1 file");
  const EventStream stream = read_evs(opt.events);
  const double seconds = opt.seconds.value_or(stream.t_end - stream.t_begin);
  const std::string json = to_json(bandwidth_report(opt.rs_fps, stream, opt.target_fps, seconds));
  if (opt.out_json) {
    std::ofstream out(*opt.out_json, std::ios::trunc);
    if (!out) fail_input("cannot open for writing: " + *opt.out_json);
    out << json << '\n';
  } else {
    std::cout << json << '\n';
  }
}

}  // namespace rsevi::cli
