#include <cmath>
#include <complex>

#include "doctest.h"
#include "piv/fft.hpp"
#include "piv/synth.hpp"

using namespace piv;
using namespace piv::synth;

namespace {

GenParams fixed_ppp(double ppp, std::uint64_t seed) {
  GenParams p;
  p.ppp_min = p.ppp_max = ppp;
  p.seed = seed;
  return p;
}

bool same_particles(const ParticleSet& a, const ParticleSet& b) {
  if (a.particles.size() != b.particles.size()) return false;
  for (std::size_t i = 0; i < a.particles.size(); ++i) {
    const Particle &pa = a.particles[i], &pb = b.particles[i];
    if (pa.x != pb.x || pa.y != pb.y || pa.diameter != pb.diameter ||
        pa.intensity != pb.intensity)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("particle count follows round(ppp * W * H)") {
  const GridSpec spec(256, 256, BoundaryMode::Periodic);
  const ParticleSet set = seed_particles(fixed_ppp(0.05, 7), spec);
  CHECK(set.particles.size() == 3277);  // round(0.05 * 65536)
}

TEST_CASE("seeding is deterministic and respects ranges") {
  const GridSpec spec(100, 100, BoundaryMode::Periodic);
  const GenParams params = fixed_ppp(0.1, 99);
  const ParticleSet a = seed_particles(params, spec);
  const ParticleSet b = seed_particles(params, spec);
  CHECK(a.particles.size() == 1000);
  CHECK(same_particles(a, b));
  for (const Particle& p : a.particles) {
    CHECK(p.x >= 0.0);
    CHECK(p.x < 100.0);
    CHECK(p.y >= 0.0);
    CHECK(p.y < 100.0);
    CHECK(p.diameter >= 1.0);
    CHECK(p.diameter <= 4.0);
    CHECK(p.intensity >= 200.0);
    CHECK(p.intensity <= 255.0);
  }
}

TEST_CASE("empty parameter ranges are rejected") {
  GenParams params;
  params.ppp_min = 0.2;
  params.ppp_max = 0.1;
  CHECK_THROWS_AS(seed_particles(params, GridSpec(32, 32)), InputError);
}

TEST_CASE("a particle renders its peak intensity at its center") {
  const GridSpec spec(32, 32, BoundaryMode::Clamp);
  ParticleSet set;
  set.particles.push_back({10.0, 12.0, 2.0, 200.0});
  const ScalarField2D img = render_particles(set, spec);
  CHECK(img(10, 12) == doctest::Approx(200.0).epsilon(1e-14));
}

TEST_CASE("intensity at half a diameter from the center is I0 exp(-2)") {
  const GridSpec spec(32, 32, BoundaryMode::Clamp);
  ParticleSet set;
  set.particles.push_back({10.0, 12.0, 2.0, 200.0});
  const ScalarField2D img = render_particles(set, spec);
  // distance d_p/2 = 1 px: exponent -(1)^2 * 8 / d_p^2 = -2
  CHECK(img(11, 12) == doctest::Approx(200.0 * std::exp(-2.0)).epsilon(1e-12));
}

TEST_CASE("distant particles keep their own peaks") {
  const GridSpec spec(64, 64, BoundaryMode::Clamp);
  ParticleSet set;
  set.particles.push_back({10.0, 10.0, 2.0, 210.0});
  set.particles.push_back({50.0, 50.0, 3.0, 240.0});
  const ScalarField2D img = render_particles(set, spec);
  CHECK(img(10, 10) == doctest::Approx(210.0).epsilon(1e-9));
  CHECK(img(50, 50) == doctest::Approx(240.0).epsilon(1e-9));
}

TEST_CASE("rendering is additive with final clipping for disjoint sets") {
  const GridSpec spec(64, 32, BoundaryMode::Clamp);
  ParticleSet left, right, both;
  left.particles.push_back({12.0, 16.0, 2.5, 250.0});
  left.particles.push_back({13.5, 16.5, 2.0, 250.0});
  right.particles.push_back({50.0, 16.0, 2.0, 230.0});
  both.particles = left.particles;
  both.particles.insert(both.particles.end(), right.particles.begin(), right.particles.end());
  const ScalarField2D a = render_particles(left, spec);
  const ScalarField2D b = render_particles(right, spec);
  const ScalarField2D ab = render_particles(both, spec);
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) {
      const double expected = std::min(255.0, a(x, y) + b(x, y));
      CHECK(ab(x, y) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("rendering wraps footprints under periodic boundary") {
  const GridSpec spec(32, 32, BoundaryMode::Periodic);
  ParticleSet set;
  set.particles.push_back({0.5, 0.5, 3.0, 220.0});
  const ScalarField2D img = render_particles(set, spec);
  CHECK(img(31, 0) > 0.0);
  CHECK(img(0, 31) > 0.0);
  CHECK(img(31, 31) > 0.0);
}

TEST_CASE("rendering is identical at any thread count") {
  const GridSpec spec(64, 64, BoundaryMode::Periodic);
  const ParticleSet set = seed_particles(fixed_ppp(0.08, 3), spec);
  threads::set_max_threads(1);
  const ScalarField2D serial = render_particles(set, spec);
  threads::set_max_threads(4);
  const ScalarField2D parallel = render_particles(set, spec);
  threads::set_max_threads(1);
  CHECK((serial.array() == parallel.array()).all());
}

TEST_CASE("solenoidal flow meets its spectral contracts") {
  FlowSynthParams params;
  params.spec = GridSpec(64, 48, BoundaryMode::Periodic);
  params.k_min = 2;
  params.smooth_sigma = 2.0;
  params.target_max_displacement = 5.0;
  params.seed = 42;
  const VectorField2D flow = random_solenoidal_flow(params);

  CHECK(max_magnitude(flow) == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(std::abs(flow.u_array().mean()) < 1e-10);
  CHECK(std::abs(flow.v_array().mean()) < 1e-10);

  // Spectral divergence i(kx u + ky v) vanishes for every mode.
  const auto su = spectral::fft2(flow.u_array());
  const auto sv = spectral::fft2(flow.v_array());
  const double rms = std::sqrt((flow.u_array().square() + flow.v_array().square()).mean());
  const double cells = static_cast<double>(params.spec.cells());
  constexpr double two_pi = 2.0 * 3.14159265358979323846;
  for (int yi = 0; yi < 48; ++yi)
    for (int xi = 0; xi < 64; ++xi) {
      const double kx = two_pi * spectral::signed_mode(xi, 64) / 64.0;
      const double ky = two_pi * spectral::signed_mode(yi, 48) / 48.0;
      const double div_mag = std::abs(kx * su(yi, xi) / cells + ky * sv(yi, xi) / cells);
      CHECK(div_mag <= 1e-10 * rms);
    }

  const VectorField2D again = random_solenoidal_flow(params);
  CHECK((again.u_array() == flow.u_array()).all());
  CHECK((again.v_array() == flow.v_array()).all());
}

TEST_CASE("solenoidal flow rejects bad parameters") {
  FlowSynthParams params;
  params.spec = GridSpec(64, 64, BoundaryMode::Periodic);
  params.k_min = 32;  // at the Nyquist wavenumber
  CHECK_THROWS_AS(random_solenoidal_flow(params), InputError);
  params.k_min = 2;
  params.spec = GridSpec(64, 64, BoundaryMode::Clamp);
  CHECK_THROWS_AS(random_solenoidal_flow(params), InputError);
  params.spec = GridSpec(4, 64, BoundaryMode::Periodic);
  CHECK_THROWS_AS(random_solenoidal_flow(params), InputError);
}

TEST_CASE("advection through zero flow leaves particles in place") {
  const GridSpec spec(32, 32, BoundaryMode::Clamp);
  const ParticleSet set = seed_particles(fixed_ppp(0.05, 5), spec);
  const ParticleSet moved = advect_particles(set, VectorField2D(spec), 1.0);
  CHECK(same_particles(set, moved));
}

TEST_CASE("uniform flow advects every particle by the same displacement") {
  const GridSpec spec(32, 32, BoundaryMode::Periodic);
  VectorField2D flow(spec);
  flow.u_array().setConstant(2.0);
  const ParticleSet set = seed_particles(fixed_ppp(0.05, 6), spec);
  const ParticleSet moved = advect_particles(set, flow, 1.0);
  for (std::size_t i = 0; i < set.particles.size(); ++i) {
    CHECK(moved.particles[i].x ==
          doctest::Approx(set.particles[i].x + 2.0).epsilon(1e-12));
    CHECK(moved.particles[i].y == doctest::Approx(set.particles[i].y).epsilon(1e-12));
    CHECK(moved.particles[i].diameter == set.particles[i].diameter);
    CHECK(moved.particles[i].intensity == set.particles[i].intensity);
  }
}

TEST_CASE("rigid rotation preserves the orbit radius through one RK4 step") {
  const GridSpec spec(64, 64, BoundaryMode::Clamp);
  const double omega = 0.05, cx = 32.0, cy = 32.0;
  VectorField2D flow(spec);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      flow.u(x, y) = omega * (y - cy);
      flow.v(x, y) = -omega * (x - cx);
    }
  ParticleSet set;
  set.particles.push_back({40.0, 32.0, 2.0, 200.0});
  set.particles.push_back({32.0, 26.0, 2.0, 200.0});
  const ParticleSet moved = advect_particles(set, flow, 1.0);
  for (std::size_t i = 0; i < set.particles.size(); ++i) {
    const double r0 = std::hypot(set.particles[i].x - cx, set.particles[i].y - cy);
    const double r1 = std::hypot(moved.particles[i].x - cx, moved.particles[i].y - cy);
    CHECK(r1 == doctest::Approx(r0).epsilon(1e-5));
  }
}

TEST_CASE("advection forward then backward returns to the start") {
  FlowSynthParams params;
  params.spec = GridSpec(64, 64, BoundaryMode::Periodic);
  params.target_max_displacement = 2.0;
  params.seed = 11;
  const VectorField2D flow = random_solenoidal_flow(params);
  const ParticleSet set = seed_particles(fixed_ppp(0.05, 12), params.spec);
  const ParticleSet there = advect_particles(set, flow, 0.5);
  const ParticleSet back = advect_particles(there, flow, -0.5);
  for (std::size_t i = 0; i < set.particles.size(); ++i) {
    CHECK(back.particles[i].x == doctest::Approx(set.particles[i].x).epsilon(1e-6));
    CHECK(back.particles[i].y == doctest::Approx(set.particles[i].y).epsilon(1e-6));
  }
}

TEST_CASE("zero flow produces identical snapshots") {
  const GridSpec spec(64, 64, BoundaryMode::Periodic);
  const ImagePair pair = make_image_pair(fixed_ppp(0.08, 21), VectorField2D(spec));
  CHECK((pair.image1.array() == pair.image2.array()).all());
  CHECK((pair.truth.u_array() == 0.0).all());
  CHECK((pair.truth.v_array() == 0.0).all());
}

TEST_CASE("uniform integer flow yields cyclically shifted snapshots") {
  const GridSpec spec(64, 64, BoundaryMode::Periodic);
  VectorField2D flow(spec);
  flow.u_array().setConstant(4.0);
  const ImagePair pair = make_image_pair(fixed_ppp(0.06, 22), flow);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      CHECK(pair.image2(x, y) ==
            doctest::Approx(pair.image1(wrap_index(x - 4, 64), y)).epsilon(1e-6));
}

TEST_CASE("pairs respect the displacement cap") {
  const GridSpec spec(32, 32, BoundaryMode::Periodic);
  VectorField2D flow(spec);
  flow.u_array().setConstant(12.0);
  GenParams params = fixed_ppp(0.05, 1);
  CHECK_THROWS_AS(make_image_pair(params, flow), InputError);

  FlowSynthParams fp;
  fp.spec = GridSpec(64, 64, BoundaryMode::Periodic);
  fp.target_max_displacement = 10.0;
  fp.seed = 2;
  // A flow rescaled exactly to the cap is accepted.
  const ImagePair pair = make_image_pair(fixed_ppp(0.05, 2), random_solenoidal_flow(fp));
  CHECK(max_magnitude(pair.truth) <= 10.0 * (1.0 + 1e-9));
}

TEST_CASE("pair generation is deterministic") {
  const GridSpec spec(64, 64, BoundaryMode::Periodic);
  FlowSynthParams fp;
  fp.spec = spec;
  fp.target_max_displacement = 5.0;
  fp.seed = 77;
  const VectorField2D flow = random_solenoidal_flow(fp);
  const ImagePair a = make_image_pair(fixed_ppp(0.07, 31), flow);
  const ImagePair b = make_image_pair(fixed_ppp(0.07, 31), flow);
  CHECK((a.image1.array() == b.image1.array()).all());
  CHECK((a.image2.array() == b.image2.array()).all());
}
