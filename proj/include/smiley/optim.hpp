#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "smiley/tensor.hpp"

namespace smiley {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moment estimates mirroring the parameter list.
struct AdamState {
  AdamConfig config;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::int64_t step = 0;

  AdamState() = default;
  AdamState(std::span<const Tensor> params, AdamConfig cfg);
};

/// One bias-corrected Adam update applied in place; increments state.step.
/// Throws NumericError on a non-finite gradient before touching anything.
void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state);

}  // namespace smiley
