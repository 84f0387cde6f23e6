#include "smiley/optim.hpp"

#include <cmath>

#include "smiley/error.hpp"

namespace smiley {

AdamState::AdamState(std::span<const Tensor> params, AdamConfig cfg) : config(cfg) {
  m.reserve(params.size());
  v.reserve(params.size());
  for (const auto& p : params) {
    m.emplace_back(p.shape());
    v.emplace_back(p.shape());
  }
}

void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw Error(ErrorCode::ShapeError, "adam: parameter/gradient/state count mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].shape() != grads[i].shape() || params[i].shape() != state.m[i].shape()) {
      throw Error(ErrorCode::ShapeError, "adam: shape mismatch for parameter " + std::to_string(i));
    }
    grads[i].check_finite("adam gradient");
  }

  const auto& cfg = state.config;
  const std::int64_t t = state.step + 1;
  const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].data();
    auto g = grads[i].data();
    auto m = state.m[i].data();
    auto v = state.v[i].data();
    for (std::size_t j = 0; j < p.size(); ++j) {
      double gj = g[j];
      double mj = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * gj;
      double vj = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * gj * gj;
      m[j] = static_cast<float>(mj);
      v[j] = static_cast<float>(vj);
      double m_hat = mj / bias1;
      double v_hat = vj / bias2;
      p[j] = static_cast<float>(p[j] - cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon));
    }
  }
  state.step = t;
}

}  // namespace smiley
