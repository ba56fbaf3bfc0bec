#include "rsevi/lucas_kanade.hpp"

#include <algorithm>
#include <cmath>

#include "rsevi/error.hpp"
#include "rsevi/parallel.hpp"

namespace rsevi {

Plane box_filter3(const Plane& in) {
  Plane out(in.height, in.width);
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x) {
      double s = 0.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int yy = std::clamp(y + dy, 0, in.height - 1);
          const int xx = std::clamp(x + dx, 0, in.width - 1);
          s += in.at(yy, xx);
        }
      out.at(y, x) = s / 9.0;
    }
  return out;
}

namespace {

Plane downsample(const Plane& in) {
  Plane out((in.height + 1) / 2, (in.width + 1) / 2);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) {
      const int y0 = 2 * y, x0 = 2 * x;
      const int y1 = std::min(y0 + 1, in.height - 1);
      const int x1 = std::min(x0 + 1, in.width - 1);
      out.at(y, x) = 0.25 * (in.at(y0, x0) + in.at(y0, x1) + in.at(y1, x0) + in.at(y1, x1));
    }
  return out;
}

double sample(const Plane& img, double x, double y) {
  const BilinearTap tap = make_tap(x, y, img.width, img.height);
  return tap_value(tap, img.values.data(), img.width);
}

struct Gradients {
  Plane gx, gy;
};

Gradients central_gradients(const Plane& img) {
  Gradients g{Plane(img.height, img.width), Plane(img.height, img.width)};
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const int xm = std::max(x - 1, 0), xp = std::min(x + 1, img.width - 1);
      const int ym = std::max(y - 1, 0), yp = std::min(y + 1, img.height - 1);
      g.gx.at(y, x) = xp == xm ? 0.0 : (img.at(y, xp) - img.at(y, xm)) / (xp - xm);
      g.gy.at(y, x) = yp == ym ? 0.0 : (img.at(yp, x) - img.at(ym, x)) / (yp - ym);
    }
  return g;
}

}  // namespace

FlowMap lucas_kanade_dense(const Plane& from, const Plane& to, const LucasKanadeParams& params) {
  if (from.height != to.height || from.width != to.width)
    fail_consistency("lucas_kanade_dense: image dims differ");
  if (params.levels < 1 || params.window < 1 || params.window % 2 == 0 || params.iterations < 1)
    fail_input("lucas_kanade_dense: invalid parameters");

  std::vector<Plane> pyr_a{from}, pyr_b{to};
  for (int l = 1; l < params.levels; ++l) {
    if (pyr_a.back().height < 2 || pyr_a.back().width < 2) break;
    pyr_a.push_back(downsample(pyr_a.back()));
    pyr_b.push_back(downsample(pyr_b.back()));
  }

  const int half = params.window / 2;
  FlowMap coarse;
  for (int level = static_cast<int>(pyr_a.size()) - 1; level >= 0; --level) {
    const Plane& A = pyr_a[level];
    const Plane& B = pyr_b[level];
    const Gradients grad = central_gradients(A);
    FlowMap flow(A.height, A.width);
    const bool finest = level == 0;

    parallel_for(0, static_cast<std::size_t>(A.height), [&](std::size_t row) {
      const int y = static_cast<int>(row);
      for (int x = 0; x < A.width; ++x) {
        double gx0 = 0.0, gy0 = 0.0;
        if (coarse.width > 0) {
          const double cx = std::min(x / 2.0, coarse.width - 1.0);
          const double cy = std::min(y / 2.0, coarse.height - 1.0);
          const BilinearTap tap = make_tap(cx, cy, coarse.width, coarse.height);
          gx0 = 2.0 * tap_value(tap, coarse.dx.data(), coarse.width);
          gy0 = 2.0 * tap_value(tap, coarse.dy.data(), coarse.width);
        }

        double gxx = 0.0, gxy = 0.0, gyy = 0.0;
        int n = 0;
        for (int wy = -half; wy <= half; ++wy)
          for (int wx = -half; wx <= half; ++wx) {
            const int qy = std::clamp(y + wy, 0, A.height - 1);
            const int qx = std::clamp(x + wx, 0, A.width - 1);
            const double ix = grad.gx.at(qy, qx), iy = grad.gy.at(qy, qx);
            gxx += ix * ix;
            gxy += ix * iy;
            gyy += iy * iy;
            ++n;
          }
        const double mxx = gxx / n, mxy = gxy / n, myy = gyy / n;
        const double tr = 0.5 * (mxx + myy);
        const double min_eig = tr - std::sqrt(std::max(0.0, 0.25 * (mxx - myy) * (mxx - myy) + mxy * mxy));
        const std::size_t p = row * static_cast<std::size_t>(A.width) + x;
        if (min_eig < params.min_eigenvalue) {
          flow.dx[p] = finest ? 0.0 : gx0;
          flow.dy[p] = finest ? 0.0 : gy0;
          continue;
        }
        const double det = gxx * gyy - gxy * gxy;
        double dx = gx0, dy = gy0;
        for (int it = 0; it < params.iterations; ++it) {
          double bx = 0.0, by = 0.0;
          for (int wy = -half; wy <= half; ++wy)
            for (int wx = -half; wx <= half; ++wx) {
              const int qy = std::clamp(y + wy, 0, A.height - 1);
              const int qx = std::clamp(x + wx, 0, A.width - 1);
              const double err = A.at(qy, qx) - sample(B, qx + dx, qy + dy);
              bx += grad.gx.at(qy, qx) * err;
              by += grad.gy.at(qy, qx) * err;
            }
          const double ux = (gyy * bx - gxy * by) / det;
          const double uy = (gxx * by - gxy * bx) / det;
          dx += ux;
          dy += uy;
          if (ux * ux + uy * uy < 1e-6) break;
        }
        flow.dx[p] = dx;
        flow.dy[p] = dy;
      }
    });
    coarse = std::move(flow);
  }
  return coarse;
}

}  // namespace rsevi
