#pragma once

#include <Eigen/Core>
#include <cmath>
#include <utility>
#include <vector>

#include "piv/core.hpp"
#include "piv/parallel.hpp"

namespace piv {

/// Row-major dense storage: rows index y, columns index x.
template <typename Scalar>
using Grid = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// W x H scalar samples (image intensity in grey values, density, ...).
template <typename Scalar = double>
class ScalarField {
 public:
  ScalarField() = default;

  explicit ScalarField(const GridSpec& spec)
      : spec_(spec), data_(Grid<Scalar>::Zero(spec.height, spec.width)) {}

  ScalarField(const GridSpec& spec, Grid<Scalar> data) : spec_(spec), data_(std::move(data)) {
    if (data_.rows() != spec.height || data_.cols() != spec.width)
      throw InputError("ScalarField: data shape does not match spec");
  }

  const GridSpec& spec() const { return spec_; }
  int width() const { return spec_.width; }
  int height() const { return spec_.height; }
  BoundaryMode boundary() const { return spec_.boundary; }
  void set_boundary(BoundaryMode b) { spec_.boundary = b; }

  Scalar operator()(int x, int y) const { return data_(y, x); }
  Scalar& operator()(int x, int y) { return data_(y, x); }

  /// Read with out-of-range coordinates resolved by the boundary mode.
  Scalar at_resolved(int x, int y) const {
    return data_(resolve_index(y, spec_.height, spec_.boundary),
                 resolve_index(x, spec_.width, spec_.boundary));
  }

  Grid<Scalar>& array() { return data_; }
  const Grid<Scalar>& array() const { return data_; }

 private:
  GridSpec spec_;
  Grid<Scalar> data_;
};

/// W x H two-component samples: displacement / velocity in pixels per frame
/// interval, u along x and v along y.
template <typename Scalar = double>
class VectorField {
 public:
  VectorField() = default;

  explicit VectorField(const GridSpec& spec)
      : spec_(spec),
        u_(Grid<Scalar>::Zero(spec.height, spec.width)),
        v_(Grid<Scalar>::Zero(spec.height, spec.width)) {}

  VectorField(const GridSpec& spec, Grid<Scalar> u, Grid<Scalar> v)
      : spec_(spec), u_(std::move(u)), v_(std::move(v)) {
    if (u_.rows() != spec.height || u_.cols() != spec.width || v_.rows() != u_.rows() ||
        v_.cols() != u_.cols())
      throw InputError("VectorField: component shape does not match spec");
  }

  const GridSpec& spec() const { return spec_; }
  int width() const { return spec_.width; }
  int height() const { return spec_.height; }
  BoundaryMode boundary() const { return spec_.boundary; }
  void set_boundary(BoundaryMode b) { spec_.boundary = b; }

  Scalar u(int x, int y) const { return u_(y, x); }
  Scalar& u(int x, int y) { return u_(y, x); }
  Scalar v(int x, int y) const { return v_(y, x); }
  Scalar& v(int x, int y) { return v_(y, x); }

  Grid<Scalar>& u_array() { return u_; }
  const Grid<Scalar>& u_array() const { return u_; }
  Grid<Scalar>& v_array() { return v_; }
  const Grid<Scalar>& v_array() const { return v_; }

 private:
  GridSpec spec_;
  Grid<Scalar> u_, v_;
};

using ScalarField2D = ScalarField<double>;
using VectorField2D = VectorField<double>;

namespace detail {

struct BilinearTaps {
  int x0, x1, y0, y1;
  double fx, fy;
};

inline BilinearTaps bilinear_taps(double x, double y, const GridSpec& spec) {
  if (!(std::isfinite(x) && std::isfinite(y)))
    throw InputError("bilinear_sample: non-finite coordinates");
  const double xf = std::floor(x);
  const double yf = std::floor(y);
  const int x0 = static_cast<int>(xf);
  const int y0 = static_cast<int>(yf);
  return {resolve_index(x0, spec.width, spec.boundary),
          resolve_index(x0 + 1, spec.width, spec.boundary),
          resolve_index(y0, spec.height, spec.boundary),
          resolve_index(y0 + 1, spec.height, spec.boundary),
          x - xf,
          y - yf};
}

}  // namespace detail

/// Bilinear interpolation of the four surrounding samples; exact at integer
/// grid nodes. Coordinates are resolved via the field's boundary mode.
template <typename Scalar>
Scalar bilinear_sample(const ScalarField<Scalar>& field, double x, double y) {
  const auto t = detail::bilinear_taps(x, y, field.spec());
  const double w00 = (1.0 - t.fx) * (1.0 - t.fy);
  const double w10 = t.fx * (1.0 - t.fy);
  const double w01 = (1.0 - t.fx) * t.fy;
  const double w11 = t.fx * t.fy;
  return static_cast<Scalar>(w00 * field(t.x0, t.y0) + w10 * field(t.x1, t.y0) +
                             w01 * field(t.x0, t.y1) + w11 * field(t.x1, t.y1));
}

template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> bilinear_sample(const VectorField<Scalar>& field, double x, double y) {
  const auto t = detail::bilinear_taps(x, y, field.spec());
  const double w00 = (1.0 - t.fx) * (1.0 - t.fy);
  const double w10 = t.fx * (1.0 - t.fy);
  const double w01 = (1.0 - t.fx) * t.fy;
  const double w11 = t.fx * t.fy;
  const double su = w00 * field.u(t.x0, t.y0) + w10 * field.u(t.x1, t.y0) +
                    w01 * field.u(t.x0, t.y1) + w11 * field.u(t.x1, t.y1);
  const double sv = w00 * field.v(t.x0, t.y0) + w10 * field.v(t.x1, t.y0) +
                    w01 * field.v(t.x0, t.y1) + w11 * field.v(t.x1, t.y1);
  return {static_cast<Scalar>(su), static_cast<Scalar>(sv)};
}

/// output(x, y) = image(x + u(x,y), y + v(x,y)), sampled bilinearly.
template <typename Scalar>
ScalarField<Scalar> warp_backward(const ScalarField<Scalar>& image,
                                  const VectorField<Scalar>& flow) {
  if (!(image.spec() == flow.spec()))
    throw InputError("warp_backward: image and flow specs differ");
  ScalarField<Scalar> out(image.spec());
  parallel_for(0, image.height(), [&](int y) {
    for (int x = 0; x < image.width(); ++x)
      out(x, y) = bilinear_sample(image, x + static_cast<double>(flow.u(x, y)),
                                  y + static_cast<double>(flow.v(x, y)));
  });
  return out;
}

namespace detail {

/// Normalized 1D Gaussian taps over [-radius, radius], radius = ceil(3 sigma).
inline std::vector<double> gaussian_kernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> w(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    w[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += w[i + radius];
  }
  for (double& x : w) x /= sum;
  return w;
}

}  // namespace detail

/// Separable convolution with a normalized Gaussian truncated at 3 sigma.
/// sigma = 0 returns the input unchanged.
template <typename Scalar>
ScalarField<Scalar> gaussian_smooth(const ScalarField<Scalar>& field, double sigma) {
  if (!(sigma >= 0.0)) throw InputError("gaussian_smooth: sigma must be non-negative");
  if (sigma == 0.0) return field;
  const auto kernel = detail::gaussian_kernel(sigma);
  const int radius = (static_cast<int>(kernel.size()) - 1) / 2;
  const int w = field.width(), h = field.height();
  const BoundaryMode mode = field.boundary();

  ScalarField<Scalar> pass(field.spec());
  parallel_for(0, h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += kernel[i + radius] * field(resolve_index(x + i, w, mode), y);
      pass(x, y) = static_cast<Scalar>(acc);
    }
  });
  ScalarField<Scalar> out(field.spec());
  parallel_for(0, h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += kernel[i + radius] * pass(x, resolve_index(y + i, h, mode));
      out(x, y) = static_cast<Scalar>(acc);
    }
  });
  return out;
}

template <typename Scalar>
VectorField<Scalar> gaussian_smooth(const VectorField<Scalar>& field, double sigma) {
  if (!(sigma >= 0.0)) throw InputError("gaussian_smooth: sigma must be non-negative");
  if (sigma == 0.0) return field;
  ScalarField<Scalar> u(field.spec(), field.u_array());
  ScalarField<Scalar> v(field.spec(), field.v_array());
  u = gaussian_smooth(u, sigma);
  v = gaussian_smooth(v, sigma);
  return VectorField<Scalar>(field.spec(), std::move(u.array()), std::move(v.array()));
}

/// Gaussian pre-filter (sigma = 1) followed by 2x decimation; output
/// dimensions are ceil(dims / 2).
template <typename Scalar>
ScalarField<Scalar> downsample2(const ScalarField<Scalar>& field) {
  if (field.width() < 4 || field.height() < 4)
    throw InputError("downsample2: field must be at least 4x4");
  const ScalarField<Scalar> smooth = gaussian_smooth(field, 1.0);
  const GridSpec out_spec((field.width() + 1) / 2, (field.height() + 1) / 2, field.boundary());
  ScalarField<Scalar> out(out_spec);
  for (int y = 0; y < out_spec.height; ++y)
    for (int x = 0; x < out_spec.width; ++x) out(x, y) = smooth(2 * x, 2 * y);
  return out;
}

/// Largest displacement magnitude over the grid.
template <typename Scalar>
double max_magnitude(const VectorField<Scalar>& field) {
  return std::sqrt(static_cast<double>(
      (field.u_array().square() + field.v_array().square()).maxCoeff()));
}

template <typename Scalar>
bool is_constant(const ScalarField<Scalar>& field) {
  return field.array().maxCoeff() == field.array().minCoeff();
}

template <typename Scalar>
ScalarField<Scalar> with_boundary(ScalarField<Scalar> field, BoundaryMode mode) {
  field.set_boundary(mode);
  return field;
}

template <typename Scalar>
VectorField<Scalar> with_boundary(VectorField<Scalar> field, BoundaryMode mode) {
  field.set_boundary(mode);
  return field;
}

}  // namespace piv
