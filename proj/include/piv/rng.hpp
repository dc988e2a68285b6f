#pragma once

#include <cstdint>
#include <random>

namespace piv::rng {

/// Derives an independent sub-seed from a base seed and a stream id
/// (splitmix64 finalizer).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed + (stream + 1) * 0x9e3779b97f4a7c15ULL;
  s = (s ^ (s >> 30)) * 0xbf58476d1ce4e5b9ULL;
  s = (s ^ (s >> 27)) * 0x94d049bb133111ebULL;
  return s ^ (s >> 31);
}

/// Deterministic uniform draw stream. Draws are generated from mt19937_64
/// through a fixed 53-bit mantissa construction, so sequences are identical
/// on every platform (std::uniform_real_distribution is not).
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream_id) : gen_(mix_seed(seed, stream_id)) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  std::uint64_t bits() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace piv::rng
