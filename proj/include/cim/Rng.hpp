#ifndef CIM_RNG_HPP
#define CIM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>

namespace cim {

// Named stream tags so graph construction, cavity noise and annealing draw
// from independent generators even when fed the same master seed.
enum class RngStream : std::uint64_t {
  Graph = 1,
  Noise = 2,
  Anneal = 3,
};

/// SplitMix64 finalizer over (master, stream). Used as the stream-splitting
/// rule: derivedSeed(s, k) seeds an independent engine for stream k.
inline std::uint64_t deriveSeed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t deriveSeed(std::uint64_t master, RngStream stream) {
  return deriveSeed(master, static_cast<std::uint64_t>(stream));
}

// Portable generator: the mt19937_64 engine output sequence is pinned by the
// C++ standard, and all value mappings below are explicit arithmetic on the
// raw 64-bit words, so draws are bit-identical across platforms. The standard
// <random> distributions are deliberately not used (their mappings are
// implementation defined).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : _engine(seed) {}

  std::uint64_t nextU64() { return _engine(); }

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(nextU64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in (0, 1]; safe as a log() argument.
  double uniformOpen01() { return 1.0 - uniform01(); }

  /// Uniform integer in [0, bound) by rejection (no modulo bias).
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t x;
    do {
      x = nextU64();
    } while (x >= limit);
    return x % bound;
  }

  /// ±1 with equal probability (top bit of one draw).
  int sign() { return (nextU64() >> 63) ? -1 : 1; }

  /// One Box-Muller pair of independent unit normals. Always consumes
  /// exactly two uniforms.
  std::pair<double, double> gaussianPair() {
    const double u1 = uniformOpen01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * M_PI * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
  }

private:
  std::mt19937_64 _engine;
};

} // namespace cim

#endif
