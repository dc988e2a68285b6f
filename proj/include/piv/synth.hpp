#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "piv/fft.hpp"
#include "piv/field.hpp"
#include "piv/rng.hpp"

namespace piv::synth {

/// One tracer: continuous position, rendered diameter (px) and peak
/// intensity (grey value).
struct Particle {
  double x = 0.0;
  double y = 0.0;
  double diameter = 1.0;
  double intensity = 0.0;
};

struct ParticleSet {
  std::vector<Particle> particles;
};

struct GenParams {
  double ppp_min = 0.05;  ///< seeding density range, particles per pixel
  double ppp_max = 0.1;
  double diameter_min = 1.0;  ///< px
  double diameter_max = 4.0;
  double intensity_min = 200.0;  ///< grey values
  double intensity_max = 255.0;
  double max_displacement = 10.0;  ///< px, cap enforced by make_image_pair
  std::uint64_t seed = 0;
};

struct FlowSynthParams {
  GridSpec spec;  ///< must be Periodic, dims >= 8
  int k_min = 2;  ///< low-cut wavenumber (cycles per domain)
  double smooth_sigma = 2.0;  ///< spectral Gaussian envelope width, px
  double target_max_displacement = 10.0;  ///< px
  std::uint64_t seed = 0;
};

namespace detail {

// Sub-stream ids off GenParams::seed. Separate streams per purpose keep
// earlier draws stable when the particle count changes.
inline constexpr std::uint64_t kStreamDensity = 0;
inline constexpr std::uint64_t kStreamPosition = 1;
inline constexpr std::uint64_t kStreamDiameter = 2;
inline constexpr std::uint64_t kStreamIntensity = 3;

inline void check_range(double lo, double hi, const char* what) {
  if (!(lo <= hi)) throw InputError(std::string("seed_particles: empty range for ") + what);
}

}  // namespace detail

/// Draws round(ppp * W * H) particles uniformly over the domain, with ppp
/// uniform in [ppp_min, ppp_max] and per-particle diameter / intensity
/// uniform in their configured ranges. Fully determined by params.seed.
inline ParticleSet seed_particles(const GenParams& params, const GridSpec& spec) {
  detail::check_range(params.ppp_min, params.ppp_max, "ppp");
  detail::check_range(params.diameter_min, params.diameter_max, "diameter");
  detail::check_range(params.intensity_min, params.intensity_max, "intensity");
  if (params.ppp_min < 0.0 || params.diameter_min <= 0.0 || params.intensity_min <= 0.0 ||
      params.intensity_max > 255.0)
    throw InputError("seed_particles: parameter ranges out of domain");

  rng::Stream density(params.seed, detail::kStreamDensity);
  rng::Stream position(params.seed, detail::kStreamPosition);
  rng::Stream diameter(params.seed, detail::kStreamDiameter);
  rng::Stream intensity(params.seed, detail::kStreamIntensity);

  const double ppp = density.uniform(params.ppp_min, params.ppp_max);
  const auto count = static_cast<std::size_t>(std::lround(ppp * static_cast<double>(spec.cells())));

  ParticleSet set;
  set.particles.resize(count);
  for (auto& p : set.particles) {
    p.x = position.uniform(0.0, spec.width);
    p.y = position.uniform(0.0, spec.height);
  }
  for (auto& p : set.particles) p.diameter = diameter.uniform(params.diameter_min, params.diameter_max);
  for (auto& p : set.particles) p.intensity = intensity.uniform(params.intensity_min, params.intensity_max);
  return set;
}

/// Renders I0 * exp((-(x-x0)^2 - (y-y0)^2) / (d_p^2 / 8)) per particle,
/// evaluated within radius 3 d_p of the center; contributions add and the
/// image is clipped to [0, 255]. Under Periodic specs footprints wrap.
inline ScalarField2D render_particles(const ParticleSet& set, const GridSpec& spec) {
  ScalarField2D image(spec);
  const bool periodic = spec.boundary == BoundaryMode::Periodic;

  // Bucket (particle, source row) pairs by target row, in particle order,
  // so each pixel accumulates in the same order at any thread count.
  struct RowEntry {
    std::int32_t particle;
    std::int32_t row;  // unwrapped source row
  };
  std::vector<std::vector<RowEntry>> rows(static_cast<std::size_t>(spec.height));
  for (std::size_t i = 0; i < set.particles.size(); ++i) {
    const Particle& p = set.particles[i];
    const double reach = 3.0 * p.diameter;
    const int y_lo = static_cast<int>(std::floor(p.y - reach));
    const int y_hi = static_cast<int>(std::ceil(p.y + reach));
    for (int y = y_lo; y <= y_hi; ++y) {
      if (periodic) {
        rows[static_cast<std::size_t>(wrap_index(y, spec.height))].push_back(
            {static_cast<std::int32_t>(i), y});
      } else if (y >= 0 && y < spec.height) {
        rows[static_cast<std::size_t>(y)].push_back({static_cast<std::int32_t>(i), y});
      }
    }
  }

  parallel_for(0, spec.height, [&](int target_row) {
    for (const RowEntry& e : rows[static_cast<std::size_t>(target_row)]) {
      const Particle& p = set.particles[static_cast<std::size_t>(e.particle)];
      const double inv_width = 8.0 / (p.diameter * p.diameter);
      const double reach = 3.0 * p.diameter;
      const double dy = e.row - p.y;
      const int x_lo = static_cast<int>(std::floor(p.x - reach));
      const int x_hi = static_cast<int>(std::ceil(p.x + reach));
      for (int x = x_lo; x <= x_hi; ++x) {
        const double dx = x - p.x;
        const double value = p.intensity * std::exp(-(dx * dx + dy * dy) * inv_width);
        if (periodic) {
          image(wrap_index(x, spec.width), target_row) += value;
        } else if (x >= 0 && x < spec.width) {
          image(x, target_row) += value;
        }
      }
    }
  });

  image.array() = image.array().min(255.0).max(0.0);
  return image;
}

/// Synthesizes a periodic, divergence-free random flow: random per-mode
/// amplitudes and phases, a |k| < k_min high-pass, a Gaussian spectral
/// envelope, solenoidal projection P(k) = I - k k^T / |k|^2, inverse
/// transform, and rescaling so the largest displacement magnitude equals
/// target_max_displacement.
inline VectorField2D random_solenoidal_flow(const FlowSynthParams& params) {
  const GridSpec& spec = params.spec;
  if (spec.boundary != BoundaryMode::Periodic)
    throw InputError("random_solenoidal_flow: spec must be Periodic");
  if (spec.width < 8 || spec.height < 8)
    throw InputError("random_solenoidal_flow: dims must be at least 8");
  if (params.k_min < 1) throw InputError("random_solenoidal_flow: k_min must be >= 1");
  if (params.k_min >= std::min(spec.width, spec.height) / 2)
    throw InputError("random_solenoidal_flow: k_min must be below the Nyquist wavenumber");
  if (!(params.smooth_sigma >= 0.0))
    throw InputError("random_solenoidal_flow: smooth_sigma must be non-negative");
  if (!(params.target_max_displacement > 0.0))
    throw InputError("random_solenoidal_flow: target_max_displacement must be positive");

  constexpr double two_pi = 2.0 * std::numbers::pi;
  rng::Stream stream_u(params.seed, 0);
  rng::Stream stream_v(params.seed, 1);

  spectral::ComplexGrid su(spec.height, spec.width);
  spectral::ComplexGrid sv(spec.height, spec.width);
  for (int yi = 0; yi < spec.height; ++yi) {
    for (int xi = 0; xi < spec.width; ++xi) {
      const double amp_u = stream_u.uniform();
      const double phase_u = stream_u.uniform(0.0, two_pi);
      const double amp_v = stream_v.uniform();
      const double phase_v = stream_v.uniform(0.0, two_pi);

      const int mx = spectral::signed_mode(xi, spec.width);
      const int my = spectral::signed_mode(yi, spec.height);
      const double mode_mag = std::hypot(static_cast<double>(mx), static_cast<double>(my));
      if (mode_mag < params.k_min) {
        su(yi, xi) = 0.0;
        sv(yi, xi) = 0.0;
        continue;
      }
      const double kx = two_pi * mx / spec.width;  // radians per pixel
      const double ky = two_pi * my / spec.height;
      const double envelope =
          std::exp(-0.5 * (kx * kx + ky * ky) * params.smooth_sigma * params.smooth_sigma);
      spectral::Complex cu = std::polar(amp_u * envelope, phase_u);
      spectral::Complex cv = std::polar(amp_v * envelope, phase_v);
      const spectral::Complex along_k = (kx * cu + ky * cv) / (kx * kx + ky * ky);
      su(yi, xi) = cu - kx * along_k;
      sv(yi, xi) = cv - ky * along_k;
    }
  }

  const spectral::ComplexGrid pu = spectral::ifft2(su);
  const spectral::ComplexGrid pv = spectral::ifft2(sv);
  VectorField2D flow(spec, pu.real(), pv.real());

  const double peak = max_magnitude(flow);
  if (!(peak > 0.0)) throw EstimationError("random_solenoidal_flow: degenerate zero draw");
  const double scale = params.target_max_displacement / peak;
  flow.u_array() *= scale;
  flow.v_array() *= scale;
  return flow;
}

/// Integrates each particle through the steady flow with one classical RK4
/// step of size dt (dt < 0 advects backward); velocity is sampled bilinearly.
inline ParticleSet advect_particles(const ParticleSet& set, const VectorField2D& flow, double dt) {
  ParticleSet out = set;
  const auto n = static_cast<int>(out.particles.size());
  parallel_for(0, n, [&](int i) {
    Particle& p = out.particles[static_cast<std::size_t>(i)];
    const Eigen::Vector2d k1 = bilinear_sample(flow, p.x, p.y);
    const Eigen::Vector2d k2 = bilinear_sample(flow, p.x + 0.5 * dt * k1.x(), p.y + 0.5 * dt * k1.y());
    const Eigen::Vector2d k3 = bilinear_sample(flow, p.x + 0.5 * dt * k2.x(), p.y + 0.5 * dt * k2.y());
    const Eigen::Vector2d k4 = bilinear_sample(flow, p.x + dt * k3.x(), p.y + dt * k3.y());
    p.x += dt / 6.0 * (k1.x() + 2.0 * k2.x() + 2.0 * k3.x() + k4.x());
    p.y += dt / 6.0 * (k1.y() + 2.0 * k2.y() + 2.0 * k3.y() + k4.y());
  });
  return out;
}

struct ImagePair {
  ScalarField2D image1;
  ScalarField2D image2;
  VectorField2D truth;
};

/// Seeds particles, advects them by dt = -1/2 and +1/2 through the flow and
/// renders the two snapshots; truth is the displacement field from frame 1
/// to frame 2.
inline ImagePair make_image_pair(const GenParams& gen, const VectorField2D& flow) {
  // Tolerates the tiny roundoff that rescaled flows carry at the cap.
  if (max_magnitude(flow) > gen.max_displacement * (1.0 + 1e-9))
    throw InputError("make_image_pair: flow exceeds the configured max displacement");
  const ParticleSet particles = seed_particles(gen, flow.spec());
  const ParticleSet back = advect_particles(particles, flow, -0.5);
  const ParticleSet forward = advect_particles(particles, flow, 0.5);
  return {render_particles(back, flow.spec()), render_particles(forward, flow.spec()), flow};
}

}  // namespace piv::synth
