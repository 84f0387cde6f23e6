#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace smiley {

/// PCG32 (XSH-RR, 64-bit state). Streams are selected by the increment, so
/// (seed, stream) pairs give independent, reproducible sequences.
class Pcg32 {
 public:
  explicit Pcg32(std::uint64_t seed = 0x853c49e6748fea9bULL, std::uint64_t stream = 0xda3e39cb94b95bdbULL);

  std::uint32_t next_u32();
  /// Uniform in [0, bound), rejection-sampled (no modulo bias). bound > 0.
  std::uint32_t bounded(std::uint32_t bound);
  std::uint64_t bounded64(std::uint64_t bound);
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller; no cached second value so the stream
  /// position depends only on the number of calls.
  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = bounded64(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 0;
};

/// SplitMix64 finalizer chained over the parts; used to derive per-stage and
/// per-cell seeds from the global seed.
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts);

}  // namespace smiley
