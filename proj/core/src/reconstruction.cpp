#include "rsevi/reconstruction.hpp"

#include <cmath>

#include "rsevi/error.hpp"
#include "rsevi/parallel.hpp"

namespace rsevi {

WeightMap build_weight_map(const ExposureModel& src, const ExposureModel& dst,
                           const TimeBins& bins, int width, const WeightMapSettings& settings) {
  if (settings.mode == WeightMapMode::kSampled)
    return weight_map_sampled(src, dst, bins, width, settings.samples_h, settings.samples_t);
  return weight_map_analytic(src, dst, bins, width);
}

void FramePairContext::validate() const {
  if (!rs0.exposure || !rs1.exposure || !rs0.exposure->is_rolling() ||
      !rs1.exposure->is_rolling())
    fail_consistency("both frames need rolling-shutter exposure models");
  if (!rs0.same_shape(rs1)) fail_consistency("RS frames differ in shape");
  if (rs0.exposure->height != rs0.height || rs1.exposure->height != rs1.height)
    fail_consistency("exposure height differs from frame height");
  if (field.height != rs0.height || field.width != rs0.width)
    fail_consistency("displacement field dims differ from the frames");
  if (!(exposure1().first_time() > exposure0().first_time()))
    fail_consistency("rs1 must start after rs0");
  const double slack = 1e-12 * (bins().t1() - bins().t0());
  if (exposure0().first_time() < bins().t0() - slack ||
      exposure1().last_time() > bins().t1() + slack)
    fail_consistency("displacement field window does not cover both exposures");
}

TimeBins pair_window(const ExposureModel& rs0, const ExposureModel& rs1, int bins) {
  return TimeBins(rs0.first_time(), rs1.last_time(), bins);
}

FlowMap contract_flow(const DisplacementField& field, const WeightMap& map) {
  if (map.bins != field.bin_count() || map.height != field.height || map.width != field.width)
    fail_consistency("contract_flow: field and weight map dims differ");
  FlowMap flow(field.height, field.width);
  const int W = field.width;
  parallel_for(0, static_cast<std::size_t>(field.height), [&](std::size_t row) {
    const int h = static_cast<int>(row);
    for (int w = 0; w < W; ++w) {
      double fx = 0.0, fy = 0.0;
      for (int i = 0; i < field.bin_count(); ++i) {
        const double m = map.at(i, h, w);
        fx += field.at(0, i, h, w) * m;
        fy += field.at(1, i, h, w) * m;
      }
      const std::size_t p = row * static_cast<std::size_t>(W) + w;
      flow.dx[p] = fx;
      flow.dy[p] = fy;
    }
  });
  return flow;
}

namespace {

void check_latent_time(const FramePairContext& ctx, double t_g) {
  if (!std::isfinite(t_g) || t_g < ctx.bins().t0() || t_g > ctx.bins().t1())
    fail_consistency("target GS time lies outside the displacement-field window");
}

}  // namespace

LatentGeometry latent_geometry(const FramePairContext& ctx, double t_g) {
  check_latent_time(ctx, t_g);
  const ExposureModel gs = ExposureModel::global(t_g, ctx.rs0.height);
  LatentGeometry g;
  g.t_g = t_g;
  g.r0_to_g = build_weight_map(ctx.exposure0(), gs, ctx.bins(), ctx.rs0.width, ctx.weight_maps);
  g.r1_to_g = build_weight_map(ctx.exposure1(), gs, ctx.bins(), ctx.rs0.width, ctx.weight_maps);
  g.g_to_r0 = negate(g.r0_to_g);
  g.g_to_r1 = negate(g.r1_to_g);
  return g;
}

PairGeometry pair_geometry(const FramePairContext& ctx) {
  PairGeometry g;
  g.r1_to_r0 = build_weight_map(ctx.exposure1(), ctx.exposure0(), ctx.bins(), ctx.rs0.width,
                                ctx.weight_maps);
  g.r0_to_r1 = negate(g.r1_to_r0);
  return g;
}

GsCandidates rs_to_gs(const FramePairContext& ctx, const LatentGeometry& geometry,
                      const DisplacementField& field) {
  GsCandidates out;
  out.t_g = geometry.t_g;
  out.flow_r0_to_g = contract_flow(field, geometry.r0_to_g);
  out.flow_r1_to_g = contract_flow(field, geometry.r1_to_g);
  WarpResult w0 = warp_backward(ctx.rs0, out.flow_r0_to_g);
  WarpResult w1 = warp_backward(ctx.rs1, out.flow_r1_to_g);
  out.from_r0 = std::move(w0.image);
  out.from_r1 = std::move(w1.image);
  out.mask0 = std::move(w0.mask);
  out.mask1 = std::move(w1.mask);
  const ExposureModel gs = ExposureModel::global(geometry.t_g, ctx.rs0.height);
  for (Frame* f : {&out.from_r0, &out.from_r1}) {
    f->timestamp = geometry.t_g;
    f->exposure = gs;
  }
  return out;
}

GsCandidates rs_to_gs(const FramePairContext& ctx, double t_g) {
  ctx.validate();
  return rs_to_gs(ctx, latent_geometry(ctx, t_g), ctx.field);
}

OcclusionMap estimate_occlusion(const FlowMap& g_to_r0, const FlowMap& r0_to_g,
                                const FlowMap& g_to_r1, const FlowMap& r1_to_g,
                                const ValidityMask& mask0, const ValidityMask& mask1,
                                const OcclusionParams& params) {
  const int H = g_to_r0.height, W = g_to_r0.width;
  for (const FlowMap* f : {&r0_to_g, &g_to_r1, &r1_to_g})
    if (f->height != H || f->width != W) fail_consistency("estimate_occlusion: flow dims differ");
  for (const ValidityMask* m : {&mask0, &mask1})
    if (m->height != H || m->width != W) fail_consistency("estimate_occlusion: mask dims differ");

  const FlowMap back0 = warp_flow(r0_to_g, g_to_r0);
  const FlowMap back1 = warp_flow(r1_to_g, g_to_r1);
  OcclusionMap occ(H, W, 0.5);
  for (std::size_t p = 0; p < occ.size(); ++p) {
    if (!mask0.values[p] && !mask1.values[p]) continue;
    const double c0 = std::hypot(g_to_r0.dx[p] + back0.dx[p], g_to_r0.dy[p] + back0.dy[p]);
    const double c1 = std::hypot(g_to_r1.dx[p] + back1.dx[p], g_to_r1.dy[p] + back1.dy[p]);
    const double w0 = mask0.values[p] ? std::exp(-c0 / params.sigma) : 0.0;
    const double w1 = mask1.values[p] ? std::exp(-c1 / params.sigma) : 0.0;
    occ.values[p] = w0 / (w0 + w1 + params.eps);
  }
  return occ;
}

Frame fuse_gs(const Frame& cand0, const Frame& cand1, const OcclusionMap& occlusion) {
  if (!cand0.same_shape(cand1) || occlusion.height != cand0.height ||
      occlusion.width != cand0.width)
    fail_consistency("fuse_gs: dims differ");
  Frame out = cand1;
  const int C = cand0.channels;
  for (std::size_t p = 0; p < occlusion.size(); ++p) {
    const double o = occlusion.values[p];
    for (int c = 0; c < C; ++c) {
      const std::size_t k = p * C + c;
      out.data[k] = cand1.data[k] + o * (cand0.data[k] - cand1.data[k]);
    }
  }
  return out;
}

WarpResult gs_to_rs(const Frame& latent, const FramePairContext& ctx, RsTarget target) {
  ctx.validate();
  if (!latent.same_shape(ctx.rs0)) fail_consistency("gs_to_rs: latent frame shape differs");
  const double t_g = latent.exposure ? latent.exposure->first_time() : latent.timestamp;
  const LatentGeometry geometry = latent_geometry(ctx, t_g);
  const bool to_r0 = target == RsTarget::kR0;
  const FlowMap flow = contract_flow(ctx.field, to_r0 ? geometry.g_to_r0 : geometry.g_to_r1);
  WarpResult out = warp_backward(latent, flow);
  const Frame& ref = to_r0 ? ctx.rs0 : ctx.rs1;
  out.image.timestamp = ref.timestamp;
  out.image.exposure = ref.exposure;
  return out;
}

WarpResult rs_to_rs(const FramePairContext& ctx, RsDirection direction) {
  ctx.validate();
  const PairGeometry geometry = pair_geometry(ctx);
  const bool into_r0 = direction == RsDirection::kR1ToR0;
  const FlowMap flow = contract_flow(ctx.field, into_r0 ? geometry.r1_to_r0 : geometry.r0_to_r1);
  WarpResult out = warp_backward(into_r0 ? ctx.rs1 : ctx.rs0, flow);
  const Frame& ref = into_r0 ? ctx.rs0 : ctx.rs1;
  out.image.timestamp = ref.timestamp;
  out.image.exposure = ref.exposure;
  return out;
}

LatentFrame synthesize_gs(const FramePairContext& ctx, double t_g, const OcclusionParams& params) {
  ctx.validate();
  const LatentGeometry geometry = latent_geometry(ctx, t_g);
  GsCandidates cand = rs_to_gs(ctx, geometry, ctx.field);
  const FlowMap g_to_r0 = contract_flow(ctx.field, geometry.g_to_r0);
  const FlowMap g_to_r1 = contract_flow(ctx.field, geometry.g_to_r1);
  LatentFrame out;
  out.occlusion = estimate_occlusion(g_to_r0, cand.flow_r0_to_g, g_to_r1, cand.flow_r1_to_g,
                                     cand.mask0, cand.mask1, params);
  out.image = fuse_gs(cand.from_r0, cand.from_r1, out.occlusion);
  out.valid = ValidityMask(ctx.rs0.height, ctx.rs0.width, 0);
  for (std::size_t p = 0; p < out.valid.size(); ++p)
    out.valid.values[p] = (cand.mask0.values[p] || cand.mask1.values[p]) ? 1 : 0;
  return out;
}

double mid_exposure_time(const ExposureModel& model) {
  return 0.5 * (model.first_time() + model.last_time());
}

std::vector<double> interpolation_times(const FramePairContext& ctx, int factor) {
  if (factor < 2) fail_input("interpolation factor must be at least 2");
  const double a = mid_exposure_time(ctx.exposure0());
  const double b = mid_exposure_time(ctx.exposure1());
  std::vector<double> times(static_cast<std::size_t>(factor));
  for (int j = 0; j < factor; ++j) times[j] = a + j * (b - a) / (factor - 1);
  times.back() = b;
  return times;
}

std::vector<LatentFrame> interpolate_sequence(const FramePairContext& ctx, int factor,
                                              const OcclusionParams& params) {
  ctx.validate();
  const std::vector<double> times = interpolation_times(ctx, factor);
  std::vector<LatentFrame> frames(times.size());
  for (std::size_t j = 0; j < times.size(); ++j) frames[j] = synthesize_gs(ctx, times[j], params);
  return frames;
}

}  // namespace rsevi
