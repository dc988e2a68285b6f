#include <cmath>

#include "doctest.h"
#include "piv/field.hpp"
#include "piv/rng.hpp"

using namespace piv;

namespace {

ScalarField2D textured_field(const GridSpec& spec, std::uint64_t seed) {
  rng::Stream s(seed, 0);
  ScalarField2D f(spec);
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) f(x, y) = s.uniform(0.0, 255.0);
  return f;
}

ScalarField2D linear_field(const GridSpec& spec, double a, double b, double c) {
  ScalarField2D f(spec);
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) f(x, y) = a + b * x + c * y;
  return f;
}

}  // namespace

TEST_CASE("bilinear sampling is exact at grid nodes") {
  const GridSpec spec(8, 7, BoundaryMode::Clamp);
  const ScalarField2D f = textured_field(spec, 1);
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x)
      CHECK(bilinear_sample(f, double(x), double(y)) == f(x, y));
}

TEST_CASE("bilinear sampling is linear between two nodes") {
  ScalarField2D f(GridSpec(6, 6, BoundaryMode::Clamp));
  f(2, 3) = 10.0;
  f(3, 3) = 20.0;
  CHECK(bilinear_sample(f, 2.5, 3.0) == doctest::Approx(15.0).epsilon(1e-14));
}

TEST_CASE("clamp boundary pins coordinates to the nearest edge") {
  const GridSpec spec(6, 5, BoundaryMode::Clamp);
  const ScalarField2D f = textured_field(spec, 2);
  // Far left of the domain: only the y fraction matters, x reads column 0.
  const double expected = 0.3 * f(0, 1) + 0.7 * f(0, 0);
  CHECK(bilinear_sample(f, -2.5, 0.3) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("periodic boundary wraps coordinates") {
  const GridSpec spec(8, 8, BoundaryMode::Periodic);
  const ScalarField2D f = textured_field(spec, 3);
  const double near_seam = bilinear_sample(f, -0.25, 2.0);
  const double expected = 0.25 * f(7, 2) + 0.75 * f(0, 2);
  CHECK(near_seam == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("non-finite coordinates are rejected") {
  const ScalarField2D f(GridSpec(4, 4));
  CHECK_THROWS_AS(bilinear_sample(f, std::nan(""), 0.0), InputError);
  CHECK_THROWS_AS(bilinear_sample(f, 0.0, std::numeric_limits<double>::infinity()), InputError);
}

TEST_CASE("bilinear sampling reproduces linear fields exactly in the interior") {
  rng::Stream s(7, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = s.uniform(-5, 5), b = s.uniform(-2, 2), c = s.uniform(-2, 2);
    const GridSpec spec(16, 12, BoundaryMode::Clamp);
    const ScalarField2D f = linear_field(spec, a, b, c);
    for (int probe = 0; probe < 20; ++probe) {
      const double x = s.uniform(0.0, spec.width - 1.0);
      const double y = s.uniform(0.0, spec.height - 1.0);
      CHECK(bilinear_sample(f, x, y) ==
            doctest::Approx(a + b * x + c * y).epsilon(1e-12));
    }
  }
}

TEST_CASE("warp with zero flow is the identity") {
  const GridSpec spec(9, 11, BoundaryMode::Clamp);
  const ScalarField2D f = textured_field(spec, 4);
  const ScalarField2D out = warp_backward(f, VectorField2D(spec));
  CHECK((out.array() == f.array()).all());
}

TEST_CASE("constant integer flow under periodic boundary is a cyclic shift") {
  const GridSpec spec(12, 10, BoundaryMode::Periodic);
  const ScalarField2D f = textured_field(spec, 5);
  VectorField2D flow(spec);
  flow.u_array().setConstant(2.0);
  const ScalarField2D out = warp_backward(f, flow);
  // Oracle: shift the array directly.
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x)
      CHECK(out(x, y) == f(wrap_index(x + 2, spec.width), y));
}

TEST_CASE("half-pixel flow offsets a ramp exactly") {
  const GridSpec spec(16, 6, BoundaryMode::Clamp);
  const ScalarField2D ramp = linear_field(spec, 0.0, 3.0, 0.0);
  VectorField2D flow(spec);
  flow.u_array().setConstant(0.5);
  const ScalarField2D out = warp_backward(ramp, flow);
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width - 1; ++x)
      CHECK(out(x, y) == doctest::Approx(3.0 * (x + 0.5)).epsilon(1e-14));
}

TEST_CASE("warp rejects mismatched specs") {
  const ScalarField2D f(GridSpec(8, 8));
  const VectorField2D flow(GridSpec(8, 9));
  CHECK_THROWS_AS(warp_backward(f, flow), InputError);
}

TEST_CASE("gaussian smoothing with sigma zero is the identity") {
  const ScalarField2D f = textured_field(GridSpec(8, 8), 6);
  const ScalarField2D out = gaussian_smooth(f, 0.0);
  CHECK((out.array() == f.array()).all());
}

TEST_CASE("negative sigma is rejected") {
  CHECK_THROWS_AS(gaussian_smooth(ScalarField2D(GridSpec(4, 4)), -1.0), InputError);
}

TEST_CASE("constant fields are fixed points of smoothing") {
  ScalarField2D f(GridSpec(10, 10, BoundaryMode::Periodic));
  f.array().setConstant(42.5);
  const ScalarField2D out = gaussian_smooth(f, 2.3);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) CHECK(out(x, y) == doctest::Approx(42.5).epsilon(1e-13));
}

TEST_CASE("unit impulse spreads to the kernel center value and keeps its sum") {
  const GridSpec spec(16, 16, BoundaryMode::Periodic);
  ScalarField2D f(spec);
  f(8, 8) = 1.0;
  const ScalarField2D out = gaussian_smooth(f, 1.0);

  // Direct kernel evaluation: radius ceil(3 sigma) = 3, normalized taps.
  double norm = 0.0;
  for (int i = -3; i <= 3; ++i) norm += std::exp(-0.5 * i * i);
  const double center_1d = 1.0 / norm;
  CHECK(out(8, 8) == doctest::Approx(center_1d * center_1d).epsilon(1e-12));
  CHECK(out.array().sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("smoothing preserves the spatial mean under periodic boundary") {
  const GridSpec spec(24, 18, BoundaryMode::Periodic);
  const ScalarField2D f = textured_field(spec, 8);
  const double mean_before = f.array().mean();
  for (double sigma : {0.7, 1.0, 2.5}) {
    const double mean_after = gaussian_smooth(f, sigma).array().mean();
    CHECK(mean_after == doctest::Approx(mean_before).epsilon(1e-10));
  }
}

TEST_CASE("downsample2 halves a constant field") {
  ScalarField2D f(GridSpec(8, 8, BoundaryMode::Periodic));
  f.array().setConstant(7.0);
  const ScalarField2D out = downsample2(f);
  CHECK(out.width() == 4);
  CHECK(out.height() == 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) CHECK(out(x, y) == doctest::Approx(7.0).epsilon(1e-13));
}

TEST_CASE("downsample2 output dimensions are ceil(dims / 2)") {
  CHECK(downsample2(ScalarField2D(GridSpec(9, 7))).width() == 5);
  CHECK(downsample2(ScalarField2D(GridSpec(9, 7))).height() == 4);
  CHECK_THROWS_AS(downsample2(ScalarField2D(GridSpec(3, 8))), InputError);
}

TEST_CASE("downsample2 keeps roughly a quarter of a bright pixel's mass") {
  const GridSpec spec(8, 8, BoundaryMode::Periodic);
  ScalarField2D f(spec);
  f(4, 3) = 255.0;
  const ScalarField2D out = downsample2(f);

  // Oracle: smooth with the same contract and decimate directly.
  const ScalarField2D smooth = gaussian_smooth(f, 1.0);
  double expected = 0.0;
  for (int y = 0; y < 8; y += 2)
    for (int x = 0; x < 8; x += 2) expected += smooth(x, y);
  CHECK(out.array().sum() == doctest::Approx(expected).epsilon(1e-12));
  CHECK(out.array().sum() == doctest::Approx(255.0 / 4.0).epsilon(0.02));
}

TEST_CASE("smoothing is identical at any thread count") {
  const ScalarField2D f = textured_field(GridSpec(33, 29, BoundaryMode::Clamp), 9);
  threads::set_max_threads(1);
  const ScalarField2D serial = gaussian_smooth(f, 1.7);
  threads::set_max_threads(4);
  const ScalarField2D parallel = gaussian_smooth(f, 1.7);
  threads::set_max_threads(1);
  CHECK((serial.array() == parallel.array()).all());
}

TEST_CASE("max_magnitude and is_constant report grid facts") {
  const GridSpec spec(4, 4);
  VectorField2D flow(spec);
  flow.u(2, 1) = 3.0;
  flow.v(2, 1) = 4.0;
  CHECK(max_magnitude(flow) == doctest::Approx(5.0).epsilon(1e-14));
  ScalarField2D f(spec);
  CHECK(is_constant(f));
  f(0, 0) = 1.0;
  CHECK(!is_constant(f));
}

TEST_CASE("field types work with float scalars too") {
  ScalarField<float> f(GridSpec(6, 6, BoundaryMode::Clamp));
  f(2, 2) = 8.0f;
  const ScalarField<float> out = gaussian_smooth(f, 1.0);
  CHECK(out(2, 2) > 0.0f);
  CHECK(out(2, 2) < 8.0f);
  VectorField<float> flow(GridSpec(6, 6));
  flow.u(1, 1) = 1.5f;
  CHECK(bilinear_sample(flow, 1.0, 1.0).x() == 1.5f);
}
