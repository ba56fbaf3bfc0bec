#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rsevi/reconstruction.hpp"

namespace rsevi {

struct LossWeights {
  double lambda_f = 0.1;
  double lambda_rs = 1.0;
  double lambda_gs = 1.0;
};

/// Unweighted loss terms plus their weighted sum.
struct LossBreakdown {
  double total = 0.0;
  double field = 0.0;
  double rs2rs = 0.0;
  double gs2rs = 0.0;
};

/// The reciprocal-reconstruction objective over a displacement field for a
/// fixed frame pair. Weight maps and occlusion maps are computed once at
/// construction (occlusion from the context's current field) and then held
/// constant, so evaluate() and gradient() describe the same function.
class SelfSupervisedObjective {
 public:
  SelfSupervisedObjective(const FramePairContext& ctx, const LossWeights& weights,
                          std::vector<double> latent_times,
                          double charbonnier_eps = kDefaultCharbonnierEps,
                          const OcclusionParams& occlusion = {});

  LossBreakdown evaluate(const DisplacementField& field) const;
  /// Returns the loss and writes dL/dD (shaped like field.values) to grad.
  LossBreakdown gradient(const DisplacementField& field, std::vector<double>& grad) const;

  /// Recomputes the occlusion maps from the given field.
  void refresh_occlusion(const DisplacementField& field);

  const std::vector<double>& latent_times() const noexcept { return latent_times_; }
  const std::vector<OcclusionMap>& occlusion_maps() const noexcept { return occlusion_; }
  const LossWeights& weights() const noexcept { return weights_; }

 private:
  LossBreakdown run(const DisplacementField& field, std::vector<double>* grad) const;
  double gs2rs_term(const DisplacementField& field, std::vector<double>* grad) const;
  double rs2rs_term(const DisplacementField& field, std::vector<double>* grad) const;

  FramePairContext ctx_;
  LossWeights weights_;
  std::vector<double> latent_times_;
  double eps_;
  OcclusionParams occlusion_params_;
  std::vector<LatentGeometry> latents_;
  std::vector<OcclusionMap> occlusion_;
  PairGeometry pair_;
};

/// (1/2N) * sum_j [Lc(I_{g_j -> r0}, I_r0) + Lc(I_{g_j -> r1}, I_r1)] with the
/// given occlusion maps (one per latent time).
double loss_gs2rs(const FramePairContext& ctx, const std::vector<double>& latent_times,
                  const std::vector<OcclusionMap>& occlusion,
                  double eps = kDefaultCharbonnierEps);

/// Lc(I_{r0 -> r1}, I_r1) + Lc(I_{r1 -> r0}, I_r0).
double loss_rs2rs(const FramePairContext& ctx, double eps = kDefaultCharbonnierEps);

/// lambda_f * L_field + lambda_rs * L_rs2rs + lambda_gs * L_gs2rs, with
/// occlusion maps derived from ctx.field.
LossBreakdown total_loss(const FramePairContext& ctx, const LossWeights& weights,
                         const std::vector<double>& latent_times,
                         double eps = kDefaultCharbonnierEps);

/// Analytic dL/dD at ctx.field (occlusion maps held constant).
std::vector<double> grad_total_loss(const FramePairContext& ctx, const LossWeights& weights,
                                    const std::vector<double>& latent_times,
                                    double eps = kDefaultCharbonnierEps);

/// Central finite differences of objective.evaluate().total.
std::vector<double> finite_difference_gradient(const SelfSupervisedObjective& objective,
                                               const DisplacementField& field, double step);

enum class GradientMode { kAnalytic, kFiniteDifference };

struct OptimizerConfig {
  /// Initial step, expressed as the largest per-entry change of D in pixels
  /// (the descent direction is the gradient scaled by its max-norm).
  double step_size = 0.5;
  int max_iters = 200;
  GradientMode gradient_mode = GradientMode::kAnalytic;
  double fd_epsilon = 1e-4;
  double convergence_tol = 1e-6;
  int latent_count = 4;
  std::uint64_t seed = 0;
  double charbonnier_eps = kDefaultCharbonnierEps;
  double armijo_c = 1e-4;
  int max_halvings = 10;
};

struct TraceRow {
  int iter = 0;
  LossBreakdown loss;
  double step = 0.0;
};

struct OptimizationResult {
  DisplacementField field;
  std::vector<TraceRow> trace;
  bool converged = false;
};

/// Gradient descent with Armijo backtracking on the self-supervised
/// objective, starting from init. Latent times are the interpolation times
/// for config.latent_count frames.
OptimizationResult optimize_field(const FramePairContext& ctx, const DisplacementField& init,
                                  const LossWeights& weights, const OptimizerConfig& config);

/// CSV with header `iter,total,field,rs2rs,gs2rs,step`.
void write_trace_csv(const std::vector<TraceRow>& trace, const std::string& path);

}  // namespace rsevi
