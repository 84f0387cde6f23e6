#pragma once

#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "smiley/rng.hpp"

namespace smiley::detail {

inline constexpr std::uint64_t kShuffleStream = 0x7261696e;

/// Cycles through seeded permutations of 0..n-1, reshuffling at each epoch.
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::uint64_t seed) : rng_(seed, kShuffleStream), order_(n) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    rng_.shuffle(std::span(order_));
  }

  std::vector<std::size_t> next(std::size_t batch) {
    std::vector<std::size_t> out;
    out.reserve(batch);
    while (out.size() < batch) {
      if (cursor_ == order_.size()) {
        rng_.shuffle(std::span(order_));
        cursor_ = 0;
      }
      out.push_back(order_[cursor_++]);
    }
    return out;
  }

 private:
  Pcg32 rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

}  // namespace smiley::detail
