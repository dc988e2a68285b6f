#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "piv/fft.hpp"
#include "piv/field.hpp"

namespace piv::diag {

/// Shell-binned spectral energy. Shell k holds the summed squared per-mode
/// amplitudes (DFT scaled by 1/(W*H)) with round(|k|) = k; energy beyond the
/// last shell folds into it so the shell sum equals the spatial mean square.
struct SpectrumResult {
  std::vector<int> k;
  std::vector<double> energy;
};

namespace detail {

inline void accumulate_shells(const spectral::ComplexGrid& coeffs, double norm,
                              std::vector<double>& energy) {
  const int h = static_cast<int>(coeffs.rows());
  const int w = static_cast<int>(coeffs.cols());
  const int k_max = static_cast<int>(energy.size()) - 1;
  for (int yi = 0; yi < h; ++yi) {
    const int my = spectral::signed_mode(yi, h);
    for (int xi = 0; xi < w; ++xi) {
      const int mx = spectral::signed_mode(xi, w);
      int shell = static_cast<int>(
          std::lround(std::hypot(static_cast<double>(mx), static_cast<double>(my))));
      if (shell > k_max) shell = k_max;
      energy[static_cast<std::size_t>(shell)] += std::norm(coeffs(yi, xi)) * norm;
    }
  }
}

inline SpectrumResult shell_spectrum_init(const GridSpec& spec) {
  if (spec.boundary != BoundaryMode::Periodic)
    throw InputError("spectrum: Periodic spec required");
  SpectrumResult res;
  const int k_max = std::min(spec.width, spec.height) / 2;
  res.k.resize(static_cast<std::size_t>(k_max) + 1);
  for (int i = 0; i <= k_max; ++i) res.k[static_cast<std::size_t>(i)] = i;
  res.energy.assign(res.k.size(), 0.0);
  return res;
}

}  // namespace detail

inline SpectrumResult energy_spectrum(const VectorField2D& field) {
  SpectrumResult res = detail::shell_spectrum_init(field.spec());
  const double n = static_cast<double>(field.spec().cells());
  const double norm = 1.0 / (n * n);
  detail::accumulate_shells(spectral::fft2(field.u_array()), norm, res.energy);
  detail::accumulate_shells(spectral::fft2(field.v_array()), norm, res.energy);
  return res;
}

inline SpectrumResult scalar_spectrum(const ScalarField2D& rho) {
  SpectrumResult res = detail::shell_spectrum_init(rho.spec());
  const double n = static_cast<double>(rho.spec().cells());
  detail::accumulate_shells(spectral::fft2(rho.array()), 1.0 / (n * n), res.energy);
  return res;
}

namespace detail {

// 3x3 Sobel derivative normalized by 1/8, exact on linear fields away from
// clamped edges. Out-of-range taps resolve through `spec.boundary`.
inline double sobel_x(const Grid<double>& g, int x, int y, const GridSpec& spec) {
  const int xm = resolve_index(x - 1, spec.width, spec.boundary);
  const int xp = resolve_index(x + 1, spec.width, spec.boundary);
  const int ym = resolve_index(y - 1, spec.height, spec.boundary);
  const int yp = resolve_index(y + 1, spec.height, spec.boundary);
  return ((g(ym, xp) - g(ym, xm)) + 2.0 * (g(y, xp) - g(y, xm)) + (g(yp, xp) - g(yp, xm))) / 8.0;
}

inline double sobel_y(const Grid<double>& g, int x, int y, const GridSpec& spec) {
  const int xm = resolve_index(x - 1, spec.width, spec.boundary);
  const int xp = resolve_index(x + 1, spec.width, spec.boundary);
  const int ym = resolve_index(y - 1, spec.height, spec.boundary);
  const int yp = resolve_index(y + 1, spec.height, spec.boundary);
  return ((g(yp, xm) - g(ym, xm)) + 2.0 * (g(yp, x) - g(ym, x)) + (g(yp, xp) - g(ym, xp))) / 8.0;
}

}  // namespace detail

/// Velocity gradient tensor components from Sobel stencils.
struct Jacobian {
  ScalarField2D du_dx, du_dy, dv_dx, dv_dy;
};

inline Jacobian velocity_jacobian(const VectorField2D& field) {
  const GridSpec& spec = field.spec();
  Jacobian jac{ScalarField2D(spec), ScalarField2D(spec), ScalarField2D(spec),
               ScalarField2D(spec)};
  parallel_for(0, spec.height, [&](int y) {
    for (int x = 0; x < spec.width; ++x) {
      jac.du_dx(x, y) = detail::sobel_x(field.u_array(), x, y, spec);
      jac.du_dy(x, y) = detail::sobel_y(field.u_array(), x, y, spec);
      jac.dv_dx(x, y) = detail::sobel_x(field.v_array(), x, y, spec);
      jac.dv_dy(x, y) = detail::sobel_y(field.v_array(), x, y, spec);
    }
  });
  return jac;
}

struct Histogram {
  std::vector<double> edges;         // size counts + 1; degenerate data gives {v, v}
  std::vector<std::int64_t> counts;  // top edge inclusive
};

namespace detail {

inline Histogram uniform_histogram(const std::vector<double>& values, int bins) {
  if (bins < 1) throw InputError("histogram: bins must be >= 1");
  Histogram h;
  if (values.empty()) {
    h.edges = {0.0, 0.0};
    h.counts = {0};
    return h;
  }
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  if (lo == hi) {
    h.edges = {lo, hi};
    h.counts = {static_cast<std::int64_t>(values.size())};
    return h;
  }
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i)
    h.edges[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / bins;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    int idx = static_cast<int>((v - lo) / (hi - lo) * bins);
    idx = std::clamp(idx, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(idx)];
  }
  return h;
}

}  // namespace detail

/// Divergence and gradient-magnitude statistics over interior pixels (the
/// stored fields crop the one-pixel stencil border).
struct DivergenceStats {
  ScalarField2D divergence;          // du/dx + dv/dy
  ScalarField2D gradient_magnitude;  // sqrt((du/dx)^2 + (dv/dy)^2), the reference scale
  Histogram histogram;               // over the stored divergence samples
  double rms_divergence = 0.0;
  double rms_gradient = 0.0;
};

inline DivergenceStats divergence_stats(const VectorField2D& field, int bins) {
  if (bins < 1) throw InputError("divergence_stats: bins must be >= 1");
  if (field.width() < 4 || field.height() < 4)
    throw InputError("divergence_stats: needs at least 4x4 so the interior forms a grid");
  const Jacobian jac = velocity_jacobian(field);
  const GridSpec interior(field.width() - 2, field.height() - 2, BoundaryMode::Clamp);
  DivergenceStats stats{ScalarField2D(interior), ScalarField2D(interior), {}, 0.0, 0.0};
  for (int y = 0; y < interior.height; ++y)
    for (int x = 0; x < interior.width; ++x) {
      const double dudx = jac.du_dx(x + 1, y + 1);
      const double dvdy = jac.dv_dy(x + 1, y + 1);
      stats.divergence(x, y) = dudx + dvdy;
      stats.gradient_magnitude(x, y) = std::sqrt(dudx * dudx + dvdy * dvdy);
    }
  std::vector<double> samples(stats.divergence.array().data(),
                              stats.divergence.array().data() + interior.cells());
  stats.histogram = detail::uniform_histogram(samples, bins);
  stats.rms_divergence = std::sqrt(stats.divergence.array().square().mean());
  stats.rms_gradient = std::sqrt(stats.gradient_magnitude.array().square().mean());
  return stats;
}

/// Moments of field increments over separation r: S[n][r] averaged over all
/// grid positions and uniformly spaced orientations.
struct StructureFnResult {
  std::vector<int> orders;
  std::vector<double> radii;
  Grid<double> moments;  // moments(order_index, radius_index)
};

namespace detail {

inline double pow_int(double base, int exponent) {
  double r = 1.0;
  for (int i = 0; i < exponent; ++i) r *= base;
  return r;
}

inline void validate_increment_args(const GridSpec& spec, const std::vector<int>& orders,
                                    const std::vector<double>& radii, int samples_per_r,
                                    bool bound_radius) {
  if (orders.empty()) throw InputError("structure_function: orders must be nonempty");
  for (int n : orders)
    if (n < 1) throw InputError("structure_function: orders must be >= 1");
  if (radii.empty()) throw InputError("structure_function: radii must be nonempty");
  for (double r : radii) {
    if (!(r >= 1.0)) throw InputError("structure_function: radii must be >= 1 px");
    if (bound_radius && r >= std::min(spec.width, spec.height) / 2.0)
      throw InputError("structure_function: radius must be below min(W, H) / 2");
  }
  if (samples_per_r < 1) throw InputError("structure_function: samples_per_r must be >= 1");
}

/// Shared increment-moment loop; magnitude_at(x, y, dx, dy) returns |delta|
/// for the probed separation. Rows accumulate into per-row slabs folded in
/// row order, so results are identical at any thread count.
template <typename MagnitudeAt>
Grid<double> increment_moments(const GridSpec& spec, const std::vector<int>& orders,
                               const std::vector<double>& radii, int samples_per_r,
                               MagnitudeAt&& magnitude_at) {
  const auto n_orders = static_cast<int>(orders.size());
  Grid<double> moments = Grid<double>::Zero(n_orders, static_cast<int>(radii.size()));
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    const double r = radii[ri];
    std::vector<double> dx(static_cast<std::size_t>(samples_per_r));
    std::vector<double> dy(static_cast<std::size_t>(samples_per_r));
    for (int s = 0; s < samples_per_r; ++s) {
      const double theta = two_pi * s / samples_per_r;
      dx[static_cast<std::size_t>(s)] = r * std::cos(theta);
      dy[static_cast<std::size_t>(s)] = r * std::sin(theta);
    }
    Grid<double> row_sums = Grid<double>::Zero(spec.height, n_orders);
    parallel_for(0, spec.height, [&](int y) {
      for (int x = 0; x < spec.width; ++x)
        for (int s = 0; s < samples_per_r; ++s) {
          const double mag = magnitude_at(x, y, dx[static_cast<std::size_t>(s)],
                                          dy[static_cast<std::size_t>(s)]);
          for (int oi = 0; oi < n_orders; ++oi)
            row_sums(y, oi) += pow_int(mag, orders[static_cast<std::size_t>(oi)]);
        }
    });
    const double denom = static_cast<double>(spec.cells()) * samples_per_r;
    for (int oi = 0; oi < n_orders; ++oi) {
      double total = 0.0;
      for (int y = 0; y < spec.height; ++y) total += row_sums(y, oi);
      moments(oi, static_cast<int>(ri)) = total / denom;
    }
  }
  return moments;
}

}  // namespace detail

inline StructureFnResult structure_function(const VectorField2D& field, std::vector<int> orders,
                                            std::vector<double> radii, int samples_per_r) {
  detail::validate_increment_args(field.spec(), orders, radii, samples_per_r, true);
  StructureFnResult res{std::move(orders), std::move(radii), {}};
  res.moments = detail::increment_moments(
      field.spec(), res.orders, res.radii, samples_per_r,
      [&field](int x, int y, double dx, double dy) {
        const Eigen::Vector2d s = bilinear_sample(field, x + dx, y + dy);
        const double du = s.x() - field.u(x, y);
        const double dv = s.y() - field.v(x, y);
        return std::sqrt(du * du + dv * dv);
      });
  return res;
}

inline StructureFnResult scalar_increments(const ScalarField2D& rho, std::vector<int> orders,
                                           std::vector<double> radii, int samples_per_r) {
  detail::validate_increment_args(rho.spec(), orders, radii, samples_per_r, true);
  StructureFnResult res{std::move(orders), std::move(radii), {}};
  res.moments = detail::increment_moments(
      rho.spec(), res.orders, res.radii, samples_per_r, [&rho](int x, int y, double dx, double dy) {
        return std::abs(bilinear_sample(rho, x + dx, y + dy) - rho(x, y));
      });
  return res;
}

/// Log-spaced histogram of the Sobel gradient magnitude over interior
/// pixels; the first bin catches [0, max * 1e-6) so zeros are representable
/// and counts always sum to the interior pixel count. All-zero gradients
/// collapse to a single bin at 0.
inline Histogram density_gradient_pdf(const ScalarField2D& rho, int bins) {
  if (bins < 1) throw InputError("density_gradient_pdf: bins must be >= 1");
  if (rho.width() < 3 || rho.height() < 3)
    throw InputError("density_gradient_pdf: needs at least 3x3 for interior pixels");
  const GridSpec& spec = rho.spec();
  std::vector<double> mags;
  mags.reserve(static_cast<std::size_t>((spec.width - 2)) * (spec.height - 2));
  for (int y = 1; y < spec.height - 1; ++y)
    for (int x = 1; x < spec.width - 1; ++x)
      mags.push_back(std::hypot(detail::sobel_x(rho.array(), x, y, spec),
                                detail::sobel_y(rho.array(), x, y, spec)));
  const double g_max = *std::max_element(mags.begin(), mags.end());

  Histogram h;
  if (g_max <= 0.0) {
    h.edges = {0.0, 0.0};
    h.counts = {static_cast<std::int64_t>(mags.size())};
    return h;
  }
  if (bins == 1) {
    h.edges = {0.0, g_max};
    h.counts = {static_cast<std::int64_t>(mags.size())};
    return h;
  }
  const double g_lo = g_max * 1e-6;
  const double log_span = std::log(g_max / g_lo);
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  h.edges[0] = 0.0;
  for (int i = 0; i < bins; ++i)
    h.edges[static_cast<std::size_t>(i) + 1] = g_lo * std::exp(log_span * i / (bins - 1));
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double v : mags) {
    int idx = 0;
    if (v >= g_lo)
      idx = 1 + std::min(bins - 2, static_cast<int>((bins - 1) * std::log(v / g_lo) / log_span));
    ++h.counts[static_cast<std::size_t>(idx)];
  }
  return h;
}

/// Invariants of the velocity gradient tensor coarse-grained at scale r.
/// In two dimensions the invariant set is P = tr(m) and Q = det(m); the
/// traceless third-order invariant vanishes identically.
struct InvariantResult {
  double scale = 0.0;
  ScalarField2D trace;        // P
  ScalarField2D determinant;  // Q
  std::vector<double> p_edges, q_edges;
  Grid<std::int64_t> joint_counts;  // joint_counts(p_bin, q_bin), interior pixels
};

inline InvariantResult coarse_grained_invariants(const VectorField2D& field, double scale,
                                                 int bins) {
  if (!(scale >= 0.0)) throw InputError("coarse_grained_invariants: scale must be non-negative");
  if (bins < 1) throw InputError("coarse_grained_invariants: bins must be >= 1");
  const VectorField2D smoothed = scale > 0.0 ? gaussian_smooth(field, scale) : field;
  const Jacobian jac = velocity_jacobian(smoothed);
  const GridSpec& spec = field.spec();

  InvariantResult res;
  res.scale = scale;
  res.trace = ScalarField2D(spec, jac.du_dx.array() + jac.dv_dy.array());
  res.determinant = ScalarField2D(
      spec, jac.du_dx.array() * jac.dv_dy.array() - jac.du_dy.array() * jac.dv_dx.array());

  // Interior excludes everything a clamped smoothing kernel or the Sobel
  // stencil can touch.
  const int margin = 1 + (scale > 0.0 ? static_cast<int>(std::ceil(3.0 * scale)) : 0);
  std::vector<double> ps, qs;
  for (int y = margin; y < spec.height - margin; ++y)
    for (int x = margin; x < spec.width - margin; ++x) {
      ps.push_back(res.trace(x, y));
      qs.push_back(res.determinant(x, y));
    }

  const Histogram hp = detail::uniform_histogram(ps, bins);
  const Histogram hq = detail::uniform_histogram(qs, bins);
  res.p_edges = hp.edges;
  res.q_edges = hq.edges;
  const auto np = static_cast<int>(hp.counts.size());
  const auto nq = static_cast<int>(hq.counts.size());
  res.joint_counts = Grid<std::int64_t>::Zero(np, nq);
  auto bin_of = [](const std::vector<double>& edges, int nbins, double v) {
    if (nbins == 1) return 0;
    const double lo = edges.front(), hi = edges.back();
    return std::clamp(static_cast<int>((v - lo) / (hi - lo) * nbins), 0, nbins - 1);
  };
  for (std::size_t i = 0; i < ps.size(); ++i)
    ++res.joint_counts(bin_of(res.p_edges, np, ps[i]), bin_of(res.q_edges, nq, qs[i]));
  return res;
}

/// Mean flux of density fluctuations: for each separation r, the average
/// over positions and orientations of rho(r' + r e) * (v(r') . grad rho(r')).
struct FluxResult {
  std::vector<double> radii;
  std::vector<double> flux;
};

inline FluxResult density_flux(const ScalarField2D& rho, const VectorField2D& field,
                               std::vector<double> radii, int samples_per_r) {
  if (!(rho.spec() == field.spec())) throw InputError("density_flux: specs differ");
  if (radii.empty()) throw InputError("density_flux: radii must be nonempty");
  if (samples_per_r < 1) throw InputError("density_flux: samples_per_r must be >= 1");
  const GridSpec& spec = rho.spec();

  Grid<double> advection(spec.height, spec.width);
  parallel_for(0, spec.height, [&](int y) {
    for (int x = 0; x < spec.width; ++x)
      advection(y, x) = field.u(x, y) * detail::sobel_x(rho.array(), x, y, spec) +
                        field.v(x, y) * detail::sobel_y(rho.array(), x, y, spec);
  });

  constexpr double two_pi = 2.0 * std::numbers::pi;
  FluxResult res{std::move(radii), {}};
  res.flux.assign(res.radii.size(), 0.0);
  for (std::size_t ri = 0; ri < res.radii.size(); ++ri) {
    const double r = res.radii[ri];
    std::vector<double> dx(static_cast<std::size_t>(samples_per_r));
    std::vector<double> dy(static_cast<std::size_t>(samples_per_r));
    for (int s = 0; s < samples_per_r; ++s) {
      const double theta = two_pi * s / samples_per_r;
      dx[static_cast<std::size_t>(s)] = r * std::cos(theta);
      dy[static_cast<std::size_t>(s)] = r * std::sin(theta);
    }
    Eigen::ArrayXd row_sums = Eigen::ArrayXd::Zero(spec.height);
    parallel_for(0, spec.height, [&](int y) {
      double acc = 0.0;
      for (int x = 0; x < spec.width; ++x)
        for (int s = 0; s < samples_per_r; ++s)
          acc += bilinear_sample(rho, x + dx[static_cast<std::size_t>(s)],
                                 y + dy[static_cast<std::size_t>(s)]) *
                 advection(y, x);
      row_sums[y] = acc;
    });
    double total = 0.0;
    for (int y = 0; y < spec.height; ++y) total += row_sums[y];
    res.flux[ri] = total / (static_cast<double>(spec.cells()) * samples_per_r);
  }
  return res;
}

/// Endpoint RMSE: sqrt of the mean squared vector difference per pixel, in
/// pixels.
inline double rmse(const VectorField2D& pred, const VectorField2D& truth) {
  if (!(pred.spec() == truth.spec())) throw InputError("rmse: specs differ");
  const Grid<double> du = pred.u_array() - truth.u_array();
  const Grid<double> dv = pred.v_array() - truth.v_array();
  return std::sqrt((du.square() + dv.square()).mean());
}

}  // namespace piv::diag
