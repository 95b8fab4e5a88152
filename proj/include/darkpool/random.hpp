#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace darkpool {

/// SplitMix64 finalizer. Used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based seed split: the seed for substream `index` of `master`
/// depends only on (master, index, purpose), never on how many other
/// substreams were created first.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                    std::uint64_t purpose = 0) noexcept {
  return splitmix64(splitmix64(splitmix64(master) ^ index) + purpose);
}

/// Seeded pseudo-random stream.
///
/// Wraps std::mt19937_64, whose output sequence is fixed by the standard, and
/// converts raw words to doubles and bounded integers without going through
/// the standard distribution classes (those are implementation-defined).
/// Identical seeds therefore give identical draws on every platform.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) {
    // Rejection on the top of the range removes modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace darkpool
