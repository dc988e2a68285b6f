#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "piv/field.hpp"

namespace piv::hs {

/// Smoothness penalty of the variational objective: the full gradient norm
/// |grad u|^2 (default) or the divergence-only penalty |div u|^2.
enum class Regularizer { Gradient, Divergence };

struct HsConfig {
  double lambda = 20.0;  ///< regularization weight on the 0-255 grey scale
  int levels = 4;        ///< pyramid depth
  int iters_per_level = 100;
  int warps_per_level = 3;
  Regularizer regularizer = Regularizer::Gradient;
  /// Gaussian width applied to the accumulated flow after each warp; couples
  /// the correction to the running total.
  double flow_smooth_sigma = 1.0;
};

inline void validate(const HsConfig& cfg) {
  if (!(cfg.lambda > 0.0)) throw InputError("HsConfig: lambda must be positive");
  if (cfg.levels < 1) throw InputError("HsConfig: levels must be >= 1");
  if (cfg.iters_per_level < 1) throw InputError("HsConfig: iters_per_level must be >= 1");
  if (cfg.warps_per_level < 1) throw InputError("HsConfig: warps_per_level must be >= 1");
  if (!(cfg.flow_smooth_sigma >= 0.0))
    throw InputError("HsConfig: flow_smooth_sigma must be non-negative");
}

/// Spatial and temporal image derivatives on a shared grid.
struct Derivatives {
  ScalarField2D ix, iy, it;
};

/// Ix, Iy are central differences of the average image (img1 + img2w) / 2
/// with clamped edge reads; It = img2w - img1.
inline Derivatives image_derivatives(const ScalarField2D& img1, const ScalarField2D& img2_warped) {
  if (!(img1.spec() == img2_warped.spec())) throw InputError("image_derivatives: specs differ");
  const GridSpec& spec = img1.spec();
  const int w = spec.width, h = spec.height;

  ScalarField2D avg(spec);
  avg.array() = (img1.array() + img2_warped.array()) * 0.5;

  Derivatives d{ScalarField2D(spec), ScalarField2D(spec), ScalarField2D(spec)};
  d.it.array() = img2_warped.array() - img1.array();
  parallel_for(0, h, [&](int y) {
    const int ym = clamp_index(y - 1, h), yp = clamp_index(y + 1, h);
    for (int x = 0; x < w; ++x) {
      const int xm = clamp_index(x - 1, w), xp = clamp_index(x + 1, w);
      d.ix(x, y) = 0.5 * (avg(xp, y) - avg(xm, y));
      d.iy(x, y) = 0.5 * (avg(x, yp) - avg(x, ym));
    }
  });
  return d;
}

/// Discrete objective minimized by solve_level under the Gradient
/// regularizer: sum of squared data residuals plus (lambda/8) of the squared
/// 4-neighbor differences of both components (clamped neighbors).
inline double hs_energy(const Derivatives& d, const VectorField2D& flow, double lambda) {
  const int w = flow.width(), h = flow.height();
  double data = 0.0, smooth = 0.0;
  for (int y = 0; y < h; ++y) {
    const int ym = clamp_index(y - 1, h), yp = clamp_index(y + 1, h);
    for (int x = 0; x < w; ++x) {
      const int xm = clamp_index(x - 1, w), xp = clamp_index(x + 1, w);
      const double r = d.ix(x, y) * flow.u(x, y) + d.iy(x, y) * flow.v(x, y) + d.it(x, y);
      data += r * r;
      const double uc = flow.u(x, y), vc = flow.v(x, y);
      const int nxs[4] = {xm, xp, x, x};
      const int nys[4] = {y, y, ym, yp};
      for (int t = 0; t < 4; ++t) {
        const double du = uc - flow.u(nxs[t], nys[t]);
        const double dv = vc - flow.v(nxs[t], nys[t]);
        smooth += du * du + dv * dv;
      }
    }
  }
  return data + lambda / 8.0 * smooth;
}

/// Jacobi sweeps of the Euler-Lagrange system at one resolution, starting
/// from `init`. Each sweep solves the per-pixel 2x2 block exactly with
/// 4-neighbor averages lagged from the previous iterate, so the discrete
/// objective is non-increasing across sweeps.
inline VectorField2D solve_level(const Derivatives& d, const VectorField2D& init,
                                 const HsConfig& cfg) {
  validate(cfg);
  if (!(d.ix.spec() == d.iy.spec()) || !(d.ix.spec() == d.it.spec()) ||
      !(d.ix.spec() == init.spec()))
    throw InputError("solve_level: derivative and init specs differ");
  const GridSpec& spec = init.spec();
  const int w = spec.width, h = spec.height;

  Grid<double> inv_denom;
  if (cfg.regularizer == Regularizer::Gradient)
    inv_denom = 1.0 / (cfg.lambda + d.ix.array().square() + d.iy.array().square());

  VectorField2D cur = init;
  VectorField2D next(spec);
  for (int iter = 0; iter < cfg.iters_per_level; ++iter) {
    parallel_for(0, h, [&](int y) {
      const int ym = clamp_index(y - 1, h), yp = clamp_index(y + 1, h);
      const int ym2 = clamp_index(y - 2, h), yp2 = clamp_index(y + 2, h);
      for (int x = 0; x < w; ++x) {
        const int xm = clamp_index(x - 1, w), xp = clamp_index(x + 1, w);
        const double ix = d.ix(x, y), iy = d.iy(x, y), it = d.it(x, y);
        if (cfg.regularizer == Regularizer::Gradient) {
          const double ubar =
              0.25 * (cur.u(xm, y) + cur.u(xp, y) + cur.u(x, ym) + cur.u(x, yp));
          const double vbar =
              0.25 * (cur.v(xm, y) + cur.v(xp, y) + cur.v(x, ym) + cur.v(x, yp));
          const double r = (ix * ubar + iy * vbar + it) * inv_denom(y, x);
          next.u(x, y) = ubar - ix * r;
          next.v(x, y) = vbar - iy * r;
        } else {
          const int xm2 = clamp_index(x - 2, w), xp2 = clamp_index(x + 2, w);
          const double quarter_lambda = 0.25 * cfg.lambda;
          const double a11 = ix * ix + 0.5 * cfg.lambda;
          const double a22 = iy * iy + 0.5 * cfg.lambda;
          const double a12 = ix * iy;
          const double cross_v = cur.v(xp, yp) - cur.v(xp, ym) - cur.v(xm, yp) + cur.v(xm, ym);
          const double cross_u = cur.u(xp, yp) - cur.u(xm, yp) - cur.u(xp, ym) + cur.u(xm, ym);
          const double bu =
              -ix * it + quarter_lambda * (cur.u(xm2, y) + cur.u(xp2, y) + cross_v);
          const double bv =
              -iy * it + quarter_lambda * (cur.v(x, ym2) + cur.v(x, yp2) + cross_u);
          const double det = a11 * a22 - a12 * a12;
          next.u(x, y) = (a22 * bu - a12 * bv) / det;
          next.v(x, y) = (a11 * bv - a12 * bu) / det;
        }
      }
    });
    std::swap(cur, next);
  }
  return cur;
}

namespace detail {

/// Doubles resolution of a flow field: bilinear sampling at half coordinates
/// with displacement values scaled by 2.
inline VectorField2D upsample_flow(const VectorField2D& coarse, const GridSpec& fine_spec) {
  VectorField2D fine(fine_spec);
  parallel_for(0, fine_spec.height, [&](int y) {
    for (int x = 0; x < fine_spec.width; ++x) {
      const Eigen::Vector2d s = bilinear_sample(coarse, 0.5 * x, 0.5 * y);
      fine.u(x, y) = 2.0 * s.x();
      fine.v(x, y) = 2.0 * s.y();
    }
  });
  return fine;
}

}  // namespace detail

/// Coarse-to-fine estimation: Gaussian pyramids, zero flow at the coarsest
/// level, and per level `warps_per_level` rounds of warp img2 by the current
/// flow, solve for a correction, accumulate, and smooth the total field.
inline VectorField2D estimate(const ScalarField2D& img1, const ScalarField2D& img2,
                              const HsConfig& cfg) {
  validate(cfg);
  if (!(img1.spec() == img2.spec())) throw InputError("estimate: image specs differ");
  const int min_dim = std::min(img1.width(), img1.height());
  if (min_dim / (1 << (cfg.levels - 1)) < 8)
    throw InputError("estimate: pyramid too deep for image size");

  std::vector<ScalarField2D> pyr1{img1}, pyr2{img2};
  for (int level = 1; level < cfg.levels; ++level) {
    pyr1.push_back(downsample2(pyr1.back()));
    pyr2.push_back(downsample2(pyr2.back()));
  }

  VectorField2D flow(pyr1.back().spec());
  for (int level = cfg.levels - 1;; --level) {
    const ScalarField2D& i1 = pyr1[static_cast<std::size_t>(level)];
    const ScalarField2D& i2 = pyr2[static_cast<std::size_t>(level)];
    for (int warp = 0; warp < cfg.warps_per_level; ++warp) {
      const ScalarField2D warped = warp_backward(i2, flow);
      const Derivatives d = image_derivatives(i1, warped);
      const VectorField2D correction = solve_level(d, VectorField2D(i1.spec()), cfg);
      flow.u_array() += correction.u_array();
      flow.v_array() += correction.v_array();
      if (cfg.flow_smooth_sigma > 0.0) flow = gaussian_smooth(flow, cfg.flow_smooth_sigma);
    }
    if (level == 0) break;
    flow = detail::upsample_flow(flow, pyr1[static_cast<std::size_t>(level - 1)].spec());
  }
  return flow;
}

}  // namespace piv::hs
