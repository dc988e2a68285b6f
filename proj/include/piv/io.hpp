#pragma once

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "piv/field.hpp"

namespace piv::io {

/// Flow interchange format, Middlebury convention, all little-endian:
/// float32 magic 202021.25, int32 width, int32 height, then width*height
/// interleaved (u, v) float32 pairs row-major starting at the top row.
inline constexpr float kFloMagic = 202021.25f;

namespace detail {

inline void put_u32le(std::ostream& os, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  os.write(b, 4);
}

inline std::uint32_t get_u32le(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw FormatError("flo: truncated stream");
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
         (std::uint32_t(b[3]) << 24);
}

inline void put_f32le(std::ostream& os, float f) { put_u32le(os, std::bit_cast<std::uint32_t>(f)); }

inline float get_f32le(std::istream& is) { return std::bit_cast<float>(get_u32le(is)); }

}  // namespace detail

inline void write_flo(const VectorField2D& flow, std::ostream& os) {
  if (!flow.u_array().isFinite().all() || !flow.v_array().isFinite().all())
    throw InputError("write_flo: flow contains non-finite samples");
  detail::put_f32le(os, kFloMagic);
  detail::put_u32le(os, static_cast<std::uint32_t>(flow.width()));
  detail::put_u32le(os, static_cast<std::uint32_t>(flow.height()));
  for (int y = 0; y < flow.height(); ++y)
    for (int x = 0; x < flow.width(); ++x) {
      detail::put_f32le(os, static_cast<float>(flow.u(x, y)));
      detail::put_f32le(os, static_cast<float>(flow.v(x, y)));
    }
  if (!os) throw IoError("write_flo: stream write failed");
}

/// Reads a .flo stream; the returned field uses Clamp boundary semantics.
inline VectorField2D read_flo(std::istream& is) {
  const float magic = detail::get_f32le(is);
  if (magic != kFloMagic) throw FormatError("flo: bad magic");
  const auto w = static_cast<std::int32_t>(detail::get_u32le(is));
  const auto h = static_cast<std::int32_t>(detail::get_u32le(is));
  if (w <= 0 || h <= 0) throw FormatError("flo: non-positive dimensions");
  if (std::int64_t(w) * h > (std::int64_t(1) << 28)) throw FormatError("flo: implausible dimensions");
  VectorField2D flow(GridSpec(w, h, BoundaryMode::Clamp));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      flow.u(x, y) = detail::get_f32le(is);
      flow.v(x, y) = detail::get_f32le(is);
    }
  return flow;
}

/// Binary 8-bit PGM (P5, maxval 255). Samples are rounded to the nearest
/// integer on write; out-of-range samples are rejected.
inline void write_pgm(const ScalarField2D& image, std::ostream& os) {
  const auto& a = image.array();
  if (!a.isFinite().all() || a.minCoeff() < 0.0 || a.maxCoeff() > 255.0)
    throw InputError("write_pgm: samples must lie in [0, 255]");
  os << "P5\n" << image.width() << " " << image.height() << "\n255\n";
  std::string row(static_cast<std::size_t>(image.width()), '\0');
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x)
      row[static_cast<std::size_t>(x)] = static_cast<char>(
          static_cast<unsigned char>(std::lround(image(x, y))));
    os.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!os) throw IoError("write_pgm: stream write failed");
}

namespace detail {

/// Next PGM header token, skipping whitespace and '#' comments.
inline int pgm_header_int(std::istream& is) {
  int c = is.get();
  while (is) {
    if (c == '#') {
      while (is && c != '\n') c = is.get();
    } else if (std::isspace(c)) {
      c = is.get();
    } else {
      break;
    }
  }
  if (!is || !std::isdigit(c)) throw FormatError("pgm: malformed header");
  long value = 0;
  while (is && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    if (value > 1 << 30) throw FormatError("pgm: implausible header value");
    c = is.get();
  }
  if (is) is.unget();
  return static_cast<int>(value);
}

}  // namespace detail

/// Reads a binary PGM; the returned field uses Clamp boundary semantics.
inline ScalarField2D read_pgm(std::istream& is) {
  char m0 = 0, m1 = 0;
  is.get(m0);
  is.get(m1);
  if (!is || m0 != 'P' || m1 != '5') throw FormatError("pgm: not a binary P5 stream");
  const int w = detail::pgm_header_int(is);
  const int h = detail::pgm_header_int(is);
  const int maxval = detail::pgm_header_int(is);
  if (w <= 0 || h <= 0) throw FormatError("pgm: non-positive dimensions");
  if (maxval != 255) throw FormatError("pgm: only maxval 255 is supported");
  const int sep = is.get();
  if (!is || !std::isspace(sep)) throw FormatError("pgm: malformed header");
  ScalarField2D image(GridSpec(w, h, BoundaryMode::Clamp));
  std::string row(static_cast<std::size_t>(w), '\0');
  for (int y = 0; y < h; ++y) {
    is.read(row.data(), static_cast<std::streamsize>(row.size()));
    if (!is) throw FormatError("pgm: truncated pixel data");
    for (int x = 0; x < w; ++x)
      image(x, y) = static_cast<double>(static_cast<unsigned char>(row[static_cast<std::size_t>(x)]));
  }
  return image;
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  return os;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path.string());
  return is;
}

}  // namespace detail

inline void write_flo(const VectorField2D& flow, const std::filesystem::path& path) {
  auto os = detail::open_out(path);
  write_flo(flow, os);
}

inline VectorField2D read_flo(const std::filesystem::path& path) {
  auto is = detail::open_in(path);
  return read_flo(is);
}

inline void write_pgm(const ScalarField2D& image, const std::filesystem::path& path) {
  auto os = detail::open_out(path);
  write_pgm(image, os);
}

inline ScalarField2D read_pgm(const std::filesystem::path& path) {
  auto is = detail::open_in(path);
  return read_pgm(is);
}

}  // namespace piv::io
