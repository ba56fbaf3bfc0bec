#include "rsevi/self_supervision.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

#include "rsevi/error.hpp"
#include "rsevi/parallel.hpp"

namespace rsevi {

namespace {

// Per-pixel bilinear taps for p + flow(p) on an H x W grid.
std::vector<BilinearTap> flow_taps(const FlowMap& flow) {
  std::vector<BilinearTap> taps(static_cast<std::size_t>(flow.height) * flow.width);
  const int W = flow.width;
  parallel_for(0, static_cast<std::size_t>(flow.height), [&](std::size_t row) {
    for (int x = 0; x < W; ++x) {
      const std::size_t p = row * W + x;
      taps[p] = make_tap(x + flow.dx[p], static_cast<double>(row) + flow.dy[p], W, flow.height);
    }
  });
  return taps;
}

Frame sample_frame(const Frame& src, const std::vector<BilinearTap>& taps) {
  Frame out(src.height, src.width, src.channels);
  const int C = src.channels;
  for (std::size_t p = 0; p < taps.size(); ++p)
    for (int c = 0; c < C; ++c)
      out.data[p * C + c] = tap_value(taps[p], src.data.data(), src.width, C, c);
  return out;
}

// Accumulates g * M[:, h, w] into the gradient entries of pixel p.
void accumulate_field_grad(std::vector<double>& grad, const DisplacementField& field,
                           const WeightMap& map, int h, int w, double gx, double gy) {
  for (int i = 0; i < field.bin_count(); ++i) {
    const double m = map.at(i, h, w);
    if (m == 0.0) continue;
    grad[field.index(0, i, h, w)] += gx * m;
    grad[field.index(1, i, h, w)] += gy * m;
  }
}

// Masked Charbonnier between `sampled` (src read through taps) and `ref`.
// Optionally accumulates dL/dD through the warp's flow (via `map`) and the
// adjoint of the sampled source image into `src_adjoint`.
double masked_warp_term(const Frame& src, const std::vector<BilinearTap>& taps,
                        const Frame& ref, double eps, double weight,
                        const DisplacementField& field, const WeightMap& map,
                        std::vector<double>* grad, std::vector<double>* src_adjoint) {
  const int H = ref.height, W = ref.width, C = ref.channels;
  std::size_t valid = 0;
  for (const BilinearTap& t : taps) valid += t.in_bounds ? 1 : 0;
  if (valid == 0) return weight * eps;
  const double scale = weight / static_cast<double>(valid * C);

  std::vector<double> row_sums(static_cast<std::size_t>(H), 0.0);
  // dL/d(sample value) per pixel and channel; zero for invalid pixels.
  std::vector<double> dres;
  if (src_adjoint) dres.assign(static_cast<std::size_t>(H) * W * C, 0.0);

  parallel_for(0, static_cast<std::size_t>(H), [&](std::size_t row) {
    double sum = 0.0;
    for (int x = 0; x < W; ++x) {
      const std::size_t p = row * W + x;
      const BilinearTap& t = taps[p];
      if (!t.in_bounds) continue;
      double gx = 0.0, gy = 0.0;
      for (int c = 0; c < C; ++c) {
        const double r = tap_value(t, src.data.data(), W, C, c) - ref.data[p * C + c];
        const double rho = std::sqrt(r * r + eps * eps);
        sum += rho;
        if (grad) {
          const double d = scale * r / rho;
          const auto g = tap_gradient(t, src.data.data(), W, C, c);
          gx += d * g[0];
          gy += d * g[1];
          if (src_adjoint) dres[p * C + c] = d;
        }
      }
      if (grad) accumulate_field_grad(*grad, field, map, static_cast<int>(row), x, gx, gy);
    }
    row_sums[row] = sum;
  });

  if (src_adjoint) {
    auto& adj = *src_adjoint;
    for (std::size_t p = 0; p < taps.size(); ++p) {
      const BilinearTap& t = taps[p];
      if (!t.in_bounds) continue;
      const double w00 = (1.0 - t.fx) * (1.0 - t.fy), w10 = t.fx * (1.0 - t.fy);
      const double w01 = (1.0 - t.fx) * t.fy, w11 = t.fx * t.fy;
      const std::size_t i00 = (static_cast<std::size_t>(t.y0) * W + t.x0) * C;
      const std::size_t i10 = (static_cast<std::size_t>(t.y0) * W + t.x1) * C;
      const std::size_t i01 = (static_cast<std::size_t>(t.y1) * W + t.x0) * C;
      const std::size_t i11 = (static_cast<std::size_t>(t.y1) * W + t.x1) * C;
      for (int c = 0; c < C; ++c) {
        const double d = dres[p * C + c];
        adj[i00 + c] += w00 * d;
        adj[i10 + c] += w10 * d;
        adj[i01 + c] += w01 * d;
        adj[i11 + c] += w11 * d;
      }
    }
  }
  const double total = std::accumulate(row_sums.begin(), row_sums.end(), 0.0);
  return scale * total;
}

// Pushes the adjoint of a sampled image (src read through taps) back to dL/dD.
void backprop_sampled(const Frame& src, const std::vector<BilinearTap>& taps,
                      const std::vector<double>& adjoint, const DisplacementField& field,
                      const WeightMap& map, std::vector<double>& grad) {
  const int H = src.height, W = src.width, C = src.channels;
  parallel_for(0, static_cast<std::size_t>(H), [&](std::size_t row) {
    for (int x = 0; x < W; ++x) {
      const std::size_t p = row * W + x;
      double gx = 0.0, gy = 0.0;
      for (int c = 0; c < C; ++c) {
        const double a = adjoint[p * C + c];
        if (a == 0.0) continue;
        const auto g = tap_gradient(taps[p], src.data.data(), W, C, c);
        gx += a * g[0];
        gy += a * g[1];
      }
      if (gx != 0.0 || gy != 0.0)
        accumulate_field_grad(grad, field, map, static_cast<int>(row), x, gx, gy);
    }
  });
}

}  // namespace

SelfSupervisedObjective::SelfSupervisedObjective(const FramePairContext& ctx,
                                                 const LossWeights& weights,
                                                 std::vector<double> latent_times,
                                                 double charbonnier_eps,
                                                 const OcclusionParams& occlusion)
    : ctx_(ctx),
      weights_(weights),
      latent_times_(std::move(latent_times)),
      eps_(charbonnier_eps),
      occlusion_params_(occlusion) {
  ctx_.validate();
  if (latent_times_.empty()) fail_input("at least one latent GS time is required");
  if (!(eps_ > 0.0)) fail_input("charbonnier eps must be positive");
  if (weights_.lambda_f < 0.0 || weights_.lambda_rs < 0.0 || weights_.lambda_gs < 0.0)
    fail_input("loss weights must be non-negative");
  latents_.reserve(latent_times_.size());
  for (double t : latent_times_) latents_.push_back(latent_geometry(ctx_, t));
  pair_ = pair_geometry(ctx_);
  refresh_occlusion(ctx_.field);
}

void SelfSupervisedObjective::refresh_occlusion(const DisplacementField& field) {
  occlusion_.clear();
  for (const LatentGeometry& g : latents_) {
    const GsCandidates cand = rs_to_gs(ctx_, g, field);
    occlusion_.push_back(estimate_occlusion(contract_flow(field, g.g_to_r0), cand.flow_r0_to_g,
                                            contract_flow(field, g.g_to_r1), cand.flow_r1_to_g,
                                            cand.mask0, cand.mask1, occlusion_params_));
  }
}

double SelfSupervisedObjective::gs2rs_term(const DisplacementField& field,
                                           std::vector<double>* grad) const {
  const double weight = 1.0 / (2.0 * static_cast<double>(latents_.size()));
  double total = 0.0;
  for (std::size_t j = 0; j < latents_.size(); ++j) {
    const LatentGeometry& g = latents_[j];
    const OcclusionMap& occ = occlusion_[j];
    const auto taps0 = flow_taps(contract_flow(field, g.r0_to_g));
    const auto taps1 = flow_taps(contract_flow(field, g.r1_to_g));
    const Frame cand0 = sample_frame(ctx_.rs0, taps0);
    const Frame cand1 = sample_frame(ctx_.rs1, taps1);
    const Frame latent = fuse_gs(cand0, cand1, occ);

    std::vector<double> latent_adj;
    if (grad) latent_adj.assign(latent.data.size(), 0.0);
    const auto out0 = flow_taps(contract_flow(field, g.g_to_r0));
    total += masked_warp_term(latent, out0, ctx_.rs0, eps_, weight, field, g.g_to_r0, grad,
                              grad ? &latent_adj : nullptr);
    const auto out1 = flow_taps(contract_flow(field, g.g_to_r1));
    total += masked_warp_term(latent, out1, ctx_.rs1, eps_, weight, field, g.g_to_r1, grad,
                              grad ? &latent_adj : nullptr);

    if (grad) {
      const int C = latent.channels;
      std::vector<double> adj0(latent_adj.size()), adj1(latent_adj.size());
      for (std::size_t p = 0; p < occ.size(); ++p)
        for (int c = 0; c < C; ++c) {
          const std::size_t k = p * C + c;
          adj0[k] = occ.values[p] * latent_adj[k];
          adj1[k] = (1.0 - occ.values[p]) * latent_adj[k];
        }
      backprop_sampled(ctx_.rs0, taps0, adj0, field, g.r0_to_g, *grad);
      backprop_sampled(ctx_.rs1, taps1, adj1, field, g.r1_to_g, *grad);
    }
  }
  return total;
}

double SelfSupervisedObjective::rs2rs_term(const DisplacementField& field,
                                           std::vector<double>* grad) const {
  const auto into_r0 = flow_taps(contract_flow(field, pair_.r1_to_r0));
  const auto into_r1 = flow_taps(contract_flow(field, pair_.r0_to_r1));
  return masked_warp_term(ctx_.rs0, into_r1, ctx_.rs1, eps_, 1.0, field, pair_.r0_to_r1, grad,
                          nullptr) +
         masked_warp_term(ctx_.rs1, into_r0, ctx_.rs0, eps_, 1.0, field, pair_.r1_to_r0, grad,
                          nullptr);
}

LossBreakdown SelfSupervisedObjective::run(const DisplacementField& field,
                                           std::vector<double>* grad) const {
  if (field.height != ctx_.field.height || field.width != ctx_.field.width ||
      !(field.bins == ctx_.field.bins))
    fail_consistency("displacement field does not match the objective's context");
  LossBreakdown out;
  std::vector<double> g_gs, g_rs;
  if (grad) {
    g_gs.assign(field.values.size(), 0.0);
    g_rs.assign(field.values.size(), 0.0);
  }
  out.gs2rs = gs2rs_term(field, grad ? &g_gs : nullptr);
  out.rs2rs = rs2rs_term(field, grad ? &g_rs : nullptr);
  out.field = smoothness_loss(field);
  out.total = weights_.lambda_f * out.field + weights_.lambda_rs * out.rs2rs +
              weights_.lambda_gs * out.gs2rs;
  if (grad) {
    const std::vector<double> g_f = smoothness_gradient(field);
    grad->assign(field.values.size(), 0.0);
    for (std::size_t k = 0; k < grad->size(); ++k)
      (*grad)[k] = weights_.lambda_f * g_f[k] + weights_.lambda_rs * g_rs[k] +
                   weights_.lambda_gs * g_gs[k];
  }
  return out;
}

LossBreakdown SelfSupervisedObjective::evaluate(const DisplacementField& field) const {
  return run(field, nullptr);
}

LossBreakdown SelfSupervisedObjective::gradient(const DisplacementField& field,
                                                std::vector<double>& grad) const {
  return run(field, &grad);
}

double loss_gs2rs(const FramePairContext& ctx, const std::vector<double>& latent_times,
                  const std::vector<OcclusionMap>& occlusion, double eps) {
  if (latent_times.empty()) fail_input("loss_gs2rs: empty latent time list");
  if (occlusion.size() != latent_times.size())
    fail_consistency("loss_gs2rs: one occlusion map per latent time is required");
  ctx.validate();
  const double weight = 1.0 / (2.0 * static_cast<double>(latent_times.size()));
  double total = 0.0;
  for (std::size_t j = 0; j < latent_times.size(); ++j) {
    const GsCandidates cand = rs_to_gs(ctx, latent_times[j]);
    Frame latent = fuse_gs(cand.from_r0, cand.from_r1, occlusion[j]);
    latent.exposure = ExposureModel::global(latent_times[j], ctx.rs0.height);
    const WarpResult r0 = gs_to_rs(latent, ctx, RsTarget::kR0);
    const WarpResult r1 = gs_to_rs(latent, ctx, RsTarget::kR1);
    total += weight * (charbonnier_masked(r0.image, ctx.rs0, r0.mask, eps) +
                       charbonnier_masked(r1.image, ctx.rs1, r1.mask, eps));
  }
  return total;
}

double loss_rs2rs(const FramePairContext& ctx, double eps) {
  const WarpResult to_r1 = rs_to_rs(ctx, RsDirection::kR0ToR1);
  const WarpResult to_r0 = rs_to_rs(ctx, RsDirection::kR1ToR0);
  return charbonnier_masked(to_r1.image, ctx.rs1, to_r1.mask, eps) +
         charbonnier_masked(to_r0.image, ctx.rs0, to_r0.mask, eps);
}

LossBreakdown total_loss(const FramePairContext& ctx, const LossWeights& weights,
                         const std::vector<double>& latent_times, double eps) {
  return SelfSupervisedObjective(ctx, weights, latent_times, eps).evaluate(ctx.field);
}

std::vector<double> grad_total_loss(const FramePairContext& ctx, const LossWeights& weights,
                                    const std::vector<double>& latent_times, double eps) {
  std::vector<double> grad;
  SelfSupervisedObjective(ctx, weights, latent_times, eps).gradient(ctx.field, grad);
  return grad;
}

std::vector<double> finite_difference_gradient(const SelfSupervisedObjective& objective,
                                               const DisplacementField& field, double step) {
  if (!(step > 0.0)) fail_input("finite-difference step must be positive");
  std::vector<double> grad(field.values.size(), 0.0);
  DisplacementField probe = field;
  for (std::size_t k = 0; k < grad.size(); ++k) {
    const double original = probe.values[k];
    probe.values[k] = original + step;
    const double up = objective.evaluate(probe).total;
    probe.values[k] = original - step;
    const double down = objective.evaluate(probe).total;
    probe.values[k] = original;
    grad[k] = (up - down) / (2.0 * step);
  }
  return grad;
}

OptimizationResult optimize_field(const FramePairContext& ctx, const DisplacementField& init,
                                  const LossWeights& weights, const OptimizerConfig& config) {
  if (!(config.step_size > 0.0) || config.max_iters < 1)
    fail_input("optimizer needs step_size > 0 and max_iters >= 1");
  FramePairContext start = ctx;
  start.field = init;
  start.validate();
  const SelfSupervisedObjective objective(
      start, weights, interpolation_times(start, std::max(2, config.latent_count)),
      config.charbonnier_eps);

  OptimizationResult result;
  result.field = init;
  LossBreakdown current = objective.evaluate(result.field);
  if (!std::isfinite(current.total)) fail_numeric("non-finite loss at the initial field");
  result.trace.push_back(TraceRow{0, current, 0.0});

  // Steepest descent. The first trial step moves the largest entry by
  // step_size px; later trials use the Barzilai-Borwein length s's / s'y,
  // capped at 8 * step_size px. Backtracking halves the step until the
  // Armijo condition holds.
  std::vector<double> grad, prev_grad;
  double alpha = 0.0;
  for (int iter = 1; iter <= config.max_iters; ++iter) {
    if (config.gradient_mode == GradientMode::kFiniteDifference) {
      grad = finite_difference_gradient(objective, result.field, config.fd_epsilon);
    } else {
      objective.gradient(result.field, grad);
    }
    double gmax = 0.0, slope = 0.0;
    for (double g : grad) {
      gmax = std::max(gmax, std::abs(g));
      slope += g * g;
    }
    if (!std::isfinite(slope)) fail_numeric("non-finite gradient");
    if (gmax == 0.0) {
      result.converged = true;
      break;
    }
    if (prev_grad.empty()) {
      alpha = config.step_size / gmax;
    } else {
      // s = -alpha * prev_grad, y = grad - prev_grad.
      double sy = 0.0, ss = 0.0;
      for (std::size_t k = 0; k < grad.size(); ++k) {
        const double sk = -alpha * prev_grad[k];
        sy += sk * (grad[k] - prev_grad[k]);
        ss += sk * sk;
      }
      alpha = sy > 0.0 ? ss / sy : 2.0 * alpha;
    }
    alpha = std::min(alpha, 8.0 * config.step_size / gmax);

    bool accepted = false;
    DisplacementField trial = result.field;
    LossBreakdown trial_loss;
    for (int halving = 0; halving <= config.max_halvings; ++halving) {
      for (std::size_t k = 0; k < grad.size(); ++k)
        trial.values[k] = result.field.values[k] - alpha * grad[k];
      trial_loss = objective.evaluate(trial);
      if (std::isfinite(trial_loss.total) &&
          trial_loss.total <= current.total - config.armijo_c * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      result.converged = true;
      break;
    }
    const double change = (current.total - trial_loss.total) / std::max(current.total, 1e-300);
    result.field = std::move(trial);
    current = trial_loss;
    result.trace.push_back(TraceRow{iter, current, alpha * gmax});
    if (change < config.convergence_tol) {
      result.converged = true;
      break;
    }
    prev_grad = grad;
  }
  return result;
}

void write_trace_csv(const std::vector<TraceRow>& trace, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail_input("cannot open for writing: " + path);
  out << "iter,total,field,rs2rs,gs2rs,step\n" << std::setprecision(17);
  for (const TraceRow& r : trace)
    out << r.iter << ',' << r.loss.total << ',' << r.loss.field << ',' << r.loss.rs2rs << ','
        << r.loss.gs2rs << ',' << r.step << '\n';
}

}  // namespace rsevi
