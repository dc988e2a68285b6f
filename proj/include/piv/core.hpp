#pragma once

#include <cstdint>
#include <stdexcept>

namespace piv {

/// How out-of-range grid coordinates are resolved when sampling.
enum class BoundaryMode { Periodic, Clamp };

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated argument contract or precondition.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Malformed byte stream or file content.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Filesystem or stream failure.
class IoError : public Error {
 public:
  using Error::Error;
};

/// An estimator cannot produce a meaningful result from the given inputs.
class EstimationError : public Error {
 public:
  using Error::Error;
};

/// Dimensions and boundary semantics of a W x H sample grid.
///
/// Sample (x, y) sits at continuous coordinate (x, y), with x indexing
/// columns and y indexing rows; row 0 is the top of the image.
struct GridSpec {
  int width = 0;
  int height = 0;
  BoundaryMode boundary = BoundaryMode::Clamp;

  GridSpec() = default;
  GridSpec(int w, int h, BoundaryMode b = BoundaryMode::Clamp)
      : width(w), height(h), boundary(b) {
    // 1x1 grids are legal so degenerate flow files round-trip; operations
    // that need neighbors impose their own minimums.
    if (w < 1 || h < 1) throw InputError("GridSpec: width and height must be positive");
  }

  bool operator==(const GridSpec&) const = default;

  std::int64_t cells() const { return std::int64_t(width) * std::int64_t(height); }
};

inline int wrap_index(int i, int n) {
  const int r = i % n;
  return r < 0 ? r + n : r;
}

inline int clamp_index(int i, int n) { return i < 0 ? 0 : (i < n ? i : n - 1); }

inline int resolve_index(int i, int n, BoundaryMode mode) {
  if (i >= 0 && i < n) return i;
  return mode == BoundaryMode::Periodic ? wrap_index(i, n) : clamp_index(i, n);
}

}  // namespace piv
