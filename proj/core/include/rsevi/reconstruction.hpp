#pragma once

#include <vector>

#include "rsevi/displacement_field.hpp"
#include "rsevi/exposure.hpp"
#include "rsevi/frame.hpp"

namespace rsevi {

enum class WeightMapMode { kAnalytic, kSampled };

struct WeightMapSettings {
  WeightMapMode mode = WeightMapMode::kAnalytic;
  int samples_h = kDefaultSamplesH;
  int samples_t = kDefaultSamplesT;
};

WeightMap build_weight_map(const ExposureModel& src, const ExposureModel& dst,
                           const TimeBins& bins, int width, const WeightMapSettings& settings);

/// Two consecutive rolling-shutter frames (each carrying its exposure model)
/// and the displacement field spanning both exposures.
struct FramePairContext {
  Frame rs0;
  Frame rs1;
  DisplacementField field;
  WeightMapSettings weight_maps;

  const ExposureModel& exposure0() const { return *rs0.exposure; }
  const ExposureModel& exposure1() const { return *rs1.exposure; }
  const TimeBins& bins() const { return field.bins; }

  /// Throws kConsistency if frames, exposures and field do not line up.
  void validate() const;
};

/// Bins over [t_start(rs0), t_end(rs1)].
TimeBins pair_window(const ExposureModel& rs0, const ExposureModel& rs1, int bins);

/// F(h, w) = sum_i D[:, i, h, w] * M[i, h, w].
FlowMap contract_flow(const DisplacementField& field, const WeightMap& map);

/// Weight maps for one latent global-shutter time. Maps into the GS grid
/// are built directly; maps back onto the RS grids are their negations.
struct LatentGeometry {
  double t_g = 0.0;
  WeightMap r0_to_g;
  WeightMap r1_to_g;
  WeightMap g_to_r0;
  WeightMap g_to_r1;
};

LatentGeometry latent_geometry(const FramePairContext& ctx, double t_g);

/// Weight maps between the two RS grids: r1 -> r0 is built, r0 -> r1 is its
/// negation.
struct PairGeometry {
  WeightMap r1_to_r0;
  WeightMap r0_to_r1;
};

PairGeometry pair_geometry(const FramePairContext& ctx);

/// Both RS frames backward-warped onto the GS grid at t_g.
struct GsCandidates {
  double t_g = 0.0;
  Frame from_r0;
  Frame from_r1;
  ValidityMask mask0;
  ValidityMask mask1;
  FlowMap flow_r0_to_g;
  FlowMap flow_r1_to_g;
};

GsCandidates rs_to_gs(const FramePairContext& ctx, double t_g);
GsCandidates rs_to_gs(const FramePairContext& ctx, const LatentGeometry& geometry,
                      const DisplacementField& field);

struct OcclusionParams {
  double sigma = 1.0;  ///< px
  double eps = 1e-6;
};

/// Weight of the r0-derived candidate per GS pixel, from forward-backward
/// flow consistency: O = m0 e^{-c0/s} / (m0 e^{-c0/s} + m1 e^{-c1/s} + eps),
/// O = 0.5 where both candidates are invalid.
using OcclusionMap = Plane;

OcclusionMap estimate_occlusion(const FlowMap& g_to_r0, const FlowMap& r0_to_g,
                                const FlowMap& g_to_r1, const FlowMap& r1_to_g,
                                const ValidityMask& mask0, const ValidityMask& mask1,
                                const OcclusionParams& params = {});

/// O * cand0 + (1 - O) * cand1, evaluated as cand1 + O * (cand0 - cand1).
Frame fuse_gs(const Frame& cand0, const Frame& cand1, const OcclusionMap& occlusion);

enum class RsTarget { kR0, kR1 };

/// Backward-warps a latent GS frame (timestamp = its exposure time) onto the
/// target RS grid.
WarpResult gs_to_rs(const Frame& latent, const FramePairContext& ctx, RsTarget target);

enum class RsDirection { kR1ToR0, kR0ToR1 };

/// Warps one RS frame onto the other's grid.
WarpResult rs_to_rs(const FramePairContext& ctx, RsDirection direction);

struct LatentFrame {
  Frame image;
  OcclusionMap occlusion;
  ValidityMask valid;  ///< 1 where at least one candidate sampled in bounds
};

/// rs_to_gs -> estimate_occlusion -> fuse_gs for one target time.
LatentFrame synthesize_gs(const FramePairContext& ctx, double t_g,
                          const OcclusionParams& params = {});

/// Middle-row exposure time (t_start + t_end) / 2.
double mid_exposure_time(const ExposureModel& model);

/// K evenly spaced times from the middle row of rs0 to the middle row of rs1.
std::vector<double> interpolation_times(const FramePairContext& ctx, int factor);

std::vector<LatentFrame> interpolate_sequence(const FramePairContext& ctx, int factor,
                                              const OcclusionParams& params = {});

}  // namespace rsevi
