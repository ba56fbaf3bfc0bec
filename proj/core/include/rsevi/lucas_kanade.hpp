#pragma once

#include "rsevi/frame.hpp"

namespace rsevi {

struct LucasKanadeParams {
  int levels = 3;
  int window = 7;
  int iterations = 5;
  /// Pixels whose mean structure tensor has a smaller minimum eigenvalue
  /// get zero flow.
  double min_eigenvalue = 1e-6;
};

/// Dense pyramidal Lucas-Kanade: for every pixel p of `from`, finds d such
/// that to(p + d) ~ from(p).
FlowMap lucas_kanade_dense(const Plane& from, const Plane& to,
                           const LucasKanadeParams& params = {});

/// 3x3 box filter with replicate borders.
Plane box_filter3(const Plane& in);

}  // namespace rsevi
