#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <vector>

#include "piv/field.hpp"

namespace piv::xcorr {

/// One interrogation pass: the window covers [-k, k]^2 around each center,
/// centers are `stride` px apart, candidate displacements span
/// [-search_radius, search_radius]^2.
struct WindowSpec {
  int half_size = 16;
  int stride = 16;
  int search_radius = 10;
};

inline void validate(const WindowSpec& win) {
  if (win.half_size < 1) throw InputError("WindowSpec: half_size must be >= 1");
  if (win.stride < 1 || win.stride > 2 * win.half_size + 1)
    throw InputError("WindowSpec: stride must lie in [1, 2k+1]");
  if (win.search_radius < 1) throw InputError("WindowSpec: search_radius must be >= 1");
}

/// Normalized correlation scores over integer displacements for one window.
class CostVolume {
 public:
  CostVolume(Eigen::Vector2i center, int search_radius)
      : center_(center),
        radius_(search_radius),
        scores_(Eigen::ArrayXd::Zero((2 * search_radius + 1) * (2 * search_radius + 1))) {}

  Eigen::Vector2i center() const { return center_; }
  int search_radius() const { return radius_; }

  double score(int ux, int uy) const { return scores_[index(ux, uy)]; }
  double& score(int ux, int uy) { return scores_[index(ux, uy)]; }

 private:
  int index(int ux, int uy) const { return (uy + radius_) * (2 * radius_ + 1) + (ux + radius_); }

  Eigen::Vector2i center_;
  int radius_;
  Eigen::ArrayXd scores_;
};

/// Multi-pass window-deformation schedule, coarse to fine.
struct MultipassConfig {
  std::vector<WindowSpec> passes{{16, 16, 10}, {16, 8, 4}, {8, 4, 2}};
  bool validate = true;  ///< normalized-median outlier replacement per pass
  bool subpixel = true;  ///< three-point Gaussian peak refinement
};

namespace detail {

// Patch variance below this (grey^2 units) is treated as zero texture; it
// sits far above the cancellation noise of the single-pass moment sums and
// far below any real particle-image window.
inline constexpr double kDegenerateEnergy = 1e-6;

}  // namespace detail

/// Normalized cross-correlation of the window at `center` in img1 against
/// displaced windows of img2: both patches are mean-subtracted and scaled to
/// unit energy, so scores lie in [-1, 1]; zero-variance patches score 0.
/// Out-of-range taps resolve through the images' boundary mode.
inline CostVolume cross_correlate(const ScalarField2D& img1, const ScalarField2D& img2,
                                  Eigen::Vector2i center, const WindowSpec& win) {
  if (!(img1.spec() == img2.spec())) throw InputError("cross_correlate: image specs differ");
  validate(win);
  const int k = win.half_size;
  const int radius = win.search_radius;
  const int n = 2 * k + 1;
  const int count = n * n;
  const int w = img1.width(), h = img1.height();
  const BoundaryMode mode = img1.boundary();

  CostVolume volume(center, radius);

  // Reference patch, mean-subtracted.
  Eigen::ArrayXd patch1(count);
  for (int row = 0; row < n; ++row) {
    const int y = resolve_index(center.y() + row - k, h, mode);
    for (int col = 0; col < n; ++col)
      patch1[row * n + col] = img1(resolve_index(center.x() + col - k, w, mode), y);
  }
  patch1 -= patch1.mean();
  const double energy1 = patch1.square().sum();
  if (energy1 <= detail::kDegenerateEnergy) return volume;
  const double inv_norm1 = 1.0 / std::sqrt(energy1);

  // img2 neighborhood covering window + search reach, gathered once so the
  // per-shift loops run on contiguous rows.
  const int m = n + 2 * radius;
  Grid<double> region(m, m);
  for (int row = 0; row < m; ++row) {
    const int y = resolve_index(center.y() + row - k - radius, h, mode);
    for (int col = 0; col < m; ++col)
      region(row, col) = img2(resolve_index(center.x() + col - k - radius, w, mode), y);
  }

  for (int uy = -radius; uy <= radius; ++uy) {
    for (int ux = -radius; ux <= radius; ++ux) {
      double sum = 0.0, sum_sq = 0.0, dot = 0.0;
      for (int row = 0; row < n; ++row) {
        const double* p2 = &region(row + uy + radius, ux + radius);
        const double* p1 = &patch1[row * n];
        for (int col = 0; col < n; ++col) {
          const double v = p2[col];
          sum += v;
          sum_sq += v * v;
          dot += p1[col] * v;
        }
      }
      const double variance = sum_sq - sum * sum / count;
      volume.score(ux, uy) =
          variance <= detail::kDegenerateEnergy ? 0.0 : dot * inv_norm1 / std::sqrt(variance);
    }
  }
  return volume;
}

namespace detail {

/// Three-point Gaussian fit offset; scores are shifted to be positive when
/// needed so the logs are defined.
inline double gaussian_fit_offset(double c_minus, double c_0, double c_plus) {
  const double lo = std::min({c_minus, c_0, c_plus});
  if (lo <= 0.0) {
    const double hi = std::max({c_minus, c_0, c_plus});
    const double shift = -lo + 1e-6 * std::max(hi - lo, 1e-12);
    c_minus += shift;
    c_0 += shift;
    c_plus += shift;
  }
  const double lm = std::log(c_minus), l0 = std::log(c_0), lp = std::log(c_plus);
  const double denom = 2.0 * lm - 4.0 * l0 + 2.0 * lp;
  if (!std::isfinite(denom) || std::abs(denom) < 1e-300) return 0.0;
  const double offset = (lm - lp) / denom;
  if (!std::isfinite(offset)) return 0.0;
  return std::clamp(offset, -0.5, 0.5);
}

}  // namespace detail

/// Integer argmax of the cost volume (ties broken toward smaller |u|, then
/// lexicographic (ux, uy)), refined per axis by a three-point Gaussian fit
/// when the peak is interior and `subpixel` is set. All-equal scores yield
/// (0, 0).
inline Eigen::Vector2d peak_displacement(const CostVolume& volume, bool subpixel) {
  const int radius = volume.search_radius();
  int best_x = 0, best_y = 0;
  double best = volume.score(0, 0);
  for (int uy = -radius; uy <= radius; ++uy) {
    for (int ux = -radius; ux <= radius; ++ux) {
      const double s = volume.score(ux, uy);
      if (s > best) {
        best = s;
        best_x = ux;
        best_y = uy;
        continue;
      }
      if (s == best) {
        const int mag_new = ux * ux + uy * uy;
        const int mag_old = best_x * best_x + best_y * best_y;
        if (mag_new < mag_old ||
            (mag_new == mag_old && (ux < best_x || (ux == best_x && uy < best_y)))) {
          best_x = ux;
          best_y = uy;
        }
      }
    }
  }

  double dx = best_x, dy = best_y;
  if (subpixel && std::abs(best_x) < radius && std::abs(best_y) < radius) {
    dx += detail::gaussian_fit_offset(volume.score(best_x - 1, best_y), best,
                                      volume.score(best_x + 1, best_y));
    dy += detail::gaussian_fit_offset(volume.score(best_x, best_y - 1), best,
                                      volume.score(best_x, best_y + 1));
  }
  return {dx, dy};
}

namespace detail {

inline double median_of(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

/// Normalized-median outlier replacement on a lattice of vectors: residuals
/// against the 3x3 neighborhood median, normalized by the median residual
/// plus a fluctuation floor; flagged vectors take the neighborhood median.
inline void replace_outliers_grid(Grid<double>& gu, Grid<double>& gv, double threshold,
                                  double fluctuation_floor) {
  const int ny = static_cast<int>(gu.rows());
  const int nx = static_cast<int>(gu.cols());
  Grid<double> out_u = gu, out_v = gv;
  std::vector<double> us, vs, rs;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      us.clear();
      vs.clear();
      rs.clear();
      for (int dj = -1; dj <= 1; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0) continue;
          const int ii = i + di, jj = j + dj;
          if (ii < 0 || ii >= nx || jj < 0 || jj >= ny) continue;
          us.push_back(gu(jj, ii));
          vs.push_back(gv(jj, ii));
        }
      }
      if (us.size() < 3) continue;
      const double mu = median_of(us);
      const double mv = median_of(vs);
      rs.reserve(us.size());
      for (std::size_t t = 0; t < us.size(); ++t) rs.push_back(std::hypot(us[t] - mu, vs[t] - mv));
      const double rm = median_of(rs);
      const double r0 = std::hypot(gu(j, i) - mu, gv(j, i) - mv);
      if (r0 / (rm + fluctuation_floor) > threshold) {
        out_u(j, i) = mu;
        out_v(j, i) = mv;
      }
    }
  }
  gu = std::move(out_u);
  gv = std::move(out_v);
}

}  // namespace detail

/// Normalized-median validation of a vector lattice (threshold 2,
/// fluctuation floor 0.1, 3x3 neighborhood by default).
inline VectorField2D replace_outliers_normalized_median(const VectorField2D& grid,
                                                        double threshold = 2.0,
                                                        double fluctuation_floor = 0.1) {
  Grid<double> gu = grid.u_array();
  Grid<double> gv = grid.v_array();
  detail::replace_outliers_grid(gu, gv, threshold, fluctuation_floor);
  return VectorField2D(grid.spec(), std::move(gu), std::move(gv));
}

namespace detail {

inline std::vector<int> window_centers(int extent, int stride) {
  std::vector<int> centers;
  for (int c = stride / 2; c < extent; c += stride) centers.push_back(c);
  return centers;
}

/// Bilinear interpolation of window-center vectors to a dense field;
/// constant extension beyond the outermost centers.
inline VectorField2D densify_grid(const Grid<double>& gu, const Grid<double>& gv,
                                  const std::vector<int>& cxs, const std::vector<int>& cys,
                                  int stride, const GridSpec& spec) {
  const int nx = static_cast<int>(cxs.size());
  const int ny = static_cast<int>(cys.size());
  VectorField2D out(spec);
  parallel_for(0, spec.height, [&](int y) {
    double gy = (y - cys.front()) / static_cast<double>(stride);
    int j = std::clamp(static_cast<int>(std::floor(gy)), 0, std::max(ny - 2, 0));
    double ty = ny > 1 ? std::clamp(gy - j, 0.0, 1.0) : 0.0;
    for (int x = 0; x < spec.width; ++x) {
      double gx = (x - cxs.front()) / static_cast<double>(stride);
      int i = std::clamp(static_cast<int>(std::floor(gx)), 0, std::max(nx - 2, 0));
      double tx = nx > 1 ? std::clamp(gx - i, 0.0, 1.0) : 0.0;
      const int i1 = std::min(i + 1, nx - 1), j1 = std::min(j + 1, ny - 1);
      const double w00 = (1 - tx) * (1 - ty), w10 = tx * (1 - ty);
      const double w01 = (1 - tx) * ty, w11 = tx * ty;
      out.u(x, y) = w00 * gu(j, i) + w10 * gu(j, i1) + w01 * gu(j1, i) + w11 * gu(j1, i1);
      out.v(x, y) = w00 * gv(j, i) + w10 * gv(j, i1) + w01 * gv(j1, i) + w11 * gv(j1, i1);
    }
  });
  return out;
}

}  // namespace detail

/// Multi-pass window-deformation estimator. Each pass deforms the images
/// symmetrically by -flow/2 and +flow/2, measures per-window corrections via
/// normalized cross-correlation, validates the window vectors, and
/// interpolates them back to a dense per-pixel field.
inline VectorField2D estimate_widim(const ScalarField2D& img1, const ScalarField2D& img2,
                                    const MultipassConfig& cfg) {
  if (!(img1.spec() == img2.spec())) throw InputError("estimate_widim: image specs differ");
  if (cfg.passes.empty()) throw InputError("estimate_widim: pass schedule is empty");
  const int min_dim = std::min(img1.width(), img1.height());
  for (std::size_t p = 0; p < cfg.passes.size(); ++p) {
    validate(cfg.passes[p]);
    if (2 * cfg.passes[p].half_size + 1 > min_dim)
      throw InputError("estimate_widim: window larger than image");
    if (p > 0 && cfg.passes[p].half_size > cfg.passes[p - 1].half_size)
      throw InputError("estimate_widim: window sizes must be non-increasing");
  }
  if (is_constant(img1) || is_constant(img2))
    throw EstimationError("estimate_widim: constant image carries no texture");

  const GridSpec& spec = img1.spec();
  VectorField2D flow(spec);
  for (const WindowSpec& win : cfg.passes) {
    VectorField2D half_fwd(spec, flow.u_array() * 0.5, flow.v_array() * 0.5);
    VectorField2D half_bwd(spec, flow.u_array() * -0.5, flow.v_array() * -0.5);
    const ScalarField2D im1d = warp_backward(img1, half_bwd);
    const ScalarField2D im2d = warp_backward(img2, half_fwd);

    const std::vector<int> cxs = detail::window_centers(spec.width, win.stride);
    const std::vector<int> cys = detail::window_centers(spec.height, win.stride);
    Grid<double> gu(cys.size(), cxs.size());
    Grid<double> gv(cys.size(), cxs.size());
    parallel_for(0, static_cast<int>(cys.size()), [&](int j) {
      for (int i = 0; i < static_cast<int>(cxs.size()); ++i) {
        const Eigen::Vector2i center(cxs[static_cast<std::size_t>(i)],
                                     cys[static_cast<std::size_t>(j)]);
        const CostVolume volume = cross_correlate(im1d, im2d, center, win);
        const Eigen::Vector2d d = peak_displacement(volume, cfg.subpixel);
        gu(j, i) = flow.u(center.x(), center.y()) + d.x();
        gv(j, i) = flow.v(center.x(), center.y()) + d.y();
      }
    });
    if (cfg.validate) detail::replace_outliers_grid(gu, gv, 2.0, 0.1);
    flow = detail::densify_grid(gu, gv, cxs, cys, win.stride, spec);
  }
  return flow;
}

}  // namespace piv::xcorr
