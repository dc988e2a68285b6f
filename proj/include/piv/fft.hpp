#pragma once

#include <complex>
#include <unsupported/Eigen/FFT>
#include <vector>

#include "piv/field.hpp"

namespace piv::spectral {

using Complex = std::complex<double>;
using ComplexGrid = Grid<Complex>;

/// Signed integer mode for DFT bin `index` of an n-point transform,
/// in [-(n-1)/2, n/2].
inline int signed_mode(int index, int n) { return index <= n / 2 ? index : index - n; }

namespace detail {

enum class Direction { Forward, Inverse };

inline void transform_2d(ComplexGrid& grid, Direction dir) {
  Eigen::FFT<double> fft;
  const int h = static_cast<int>(grid.rows());
  const int w = static_cast<int>(grid.cols());
  std::vector<Complex> line, out;

  line.resize(static_cast<std::size_t>(w));
  out.resize(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) line[static_cast<std::size_t>(x)] = grid(y, x);
    if (dir == Direction::Forward)
      fft.fwd(out, line);
    else
      fft.inv(out, line);
    for (int x = 0; x < w; ++x) grid(y, x) = out[static_cast<std::size_t>(x)];
  }

  line.resize(static_cast<std::size_t>(h));
  out.resize(static_cast<std::size_t>(h));
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) line[static_cast<std::size_t>(y)] = grid(y, x);
    if (dir == Direction::Forward)
      fft.fwd(out, line);
    else
      fft.inv(out, line);
    for (int y = 0; y < h; ++y) grid(y, x) = out[static_cast<std::size_t>(y)];
  }
}

}  // namespace detail

/// Unnormalized forward 2D DFT.
inline ComplexGrid fft2(const ComplexGrid& in) {
  ComplexGrid out = in;
  detail::transform_2d(out, detail::Direction::Forward);
  return out;
}

inline ComplexGrid fft2(const Grid<double>& in) {
  ComplexGrid c = in.cast<Complex>();
  return fft2(c);
}

/// Inverse 2D DFT scaled by 1/(W*H); inverse of fft2.
inline ComplexGrid ifft2(const ComplexGrid& in) {
  ComplexGrid out = in;
  detail::transform_2d(out, detail::Direction::Inverse);
  return out;
}

}  // namespace piv::spectral
