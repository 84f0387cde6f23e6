#pragma once

// Templated forward/backward for the feedforward embedder. Instantiated for
// float (training, inference) and double (gradient verification).

#include <cstddef>
#include <span>
#include <vector>

#include "smiley/model.hpp"

namespace smiley::detail {

template <typename T>
struct LayerRef {
  std::span<const T> weight;  // out x in
  std::span<const T> bias;
  std::size_t in = 0;
  std::size_t out = 0;
};

template <typename T>
struct Trace {
  // acts[0] is the input; acts[l + 1] is layer l's output (ReLU applied
  // except on the last layer, which holds the logits).
  std::vector<std::vector<T>> acts;
};

template <typename T>
void mlp_forward(std::span<const LayerRef<T>> layers, std::span<const T> x, Trace<T>& trace) {
  trace.acts.resize(layers.size() + 1);
  trace.acts[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const auto& in = trace.acts[l];
    auto& out = trace.acts[l + 1];
    out.resize(layer.out);
    const bool last = l + 1 == layers.size();
    for (std::size_t o = 0; o < layer.out; ++o) {
      double acc = layer.bias[o];
      const T* w = layer.weight.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) acc += double(w[i]) * double(in[i]);
      if (!last && acc < 0.0) acc = 0.0;
      out[o] = static_cast<T>(acc);
    }
  }
}

/// Accumulates d(loss)/d(params) into grads ([W0, b0, W1, b1, ...]) given
/// d(loss)/d(logits). Writes d(loss)/d(input) when input_grad is non-null.
template <typename T>
void mlp_backward(std::span<const LayerRef<T>> layers, const Trace<T>& trace,
                  std::span<const double> dlogits, std::vector<std::vector<double>>& grads,
                  std::vector<double>* input_grad = nullptr) {
  std::vector<double> delta(dlogits.begin(), dlogits.end());
  std::vector<double> prev;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& layer = layers[l];
    const auto& in = trace.acts[l];
    auto& gw = grads[2 * l];
    auto& gb = grads[2 * l + 1];
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double d = delta[o];
      gb[o] += d;
      if (d == 0.0) continue;
      double* g = gw.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) g[i] += d * double(in[i]);
    }
    if (l == 0 && input_grad == nullptr) break;
    prev.assign(layer.in, 0.0);
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const T* w = layer.weight.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) prev[i] += double(w[i]) * d;
    }
    if (l > 0) {
      for (std::size_t i = 0; i < layer.in; ++i) {
        if (!(in[i] > T(0))) prev[i] = 0.0;
      }
    }
    delta.swap(prev);
  }
  if (input_grad != nullptr) *input_grad = delta;
}

std::vector<LayerRef<float>> layer_refs(const EmbedderParams& params);

}  // namespace smiley::detail
