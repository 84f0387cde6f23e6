#include <algorithm>
#include <cmath>

#include "mlp_core.hpp"
#include "smiley/model.hpp"

namespace smiley {

std::vector<detail::LayerRef<float>> detail::layer_refs(const EmbedderParams& params) {
  std::vector<detail::LayerRef<float>> refs;
  for (std::size_t l = 0; l < params.layer_count(); ++l) {
    const auto& w = params.weight(l);
    refs.push_back({w.data(), params.bias(l).data(), w.dim(1), w.dim(0)});
  }
  return refs;
}

namespace {

std::vector<detail::LayerRef<double>> layer_refs(const NetF64& net) {
  std::vector<detail::LayerRef<double>> refs;
  for (std::size_t l = 0; l + 1 < net.dims.size(); ++l) {
    refs.push_back({net.tensors[2 * l], net.tensors[2 * l + 1], net.dims[l], net.dims[l + 1]});
  }
  return refs;
}

EmbedderParams make_shapes(const ModelConfig& cfg) {
  if (cfg.input_dim == 0 || cfg.embed_dim == 0) {
    throw Error(ErrorCode::ConfigError, "model input and embedding dimensions must be positive");
  }
  EmbedderParams p;
  p.config = cfg;
  auto dims = layer_dims(cfg);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    p.tensors.emplace_back(std::vector<std::size_t>{dims[l + 1], dims[l]});
    p.tensors.emplace_back(std::vector<std::size_t>{dims[l + 1]});
  }
  return p;
}

}  // namespace

std::vector<std::size_t> layer_dims(const ModelConfig& cfg) {
  std::vector<std::size_t> dims{cfg.input_dim};
  for (auto h : cfg.hidden) {
    if (h == 0) throw Error(ErrorCode::ConfigError, "hidden layer width must be positive");
    dims.push_back(h);
  }
  dims.push_back(cfg.embed_dim);
  return dims;
}

EmbedderParams zero_embedder(const ModelConfig& cfg) { return make_shapes(cfg); }

EmbedderParams init_embedder(const ModelConfig& cfg) {
  EmbedderParams p = make_shapes(cfg);
  Pcg32 rng(cfg.seed, 0x5eed0f);
  for (std::size_t l = 0; l < p.layer_count(); ++l) {
    auto& w = p.weight(l);
    const double stddev = cfg.init_scale * std::sqrt(2.0 / static_cast<double>(w.dim(1)));
    for (auto& v : w.data()) v = static_cast<float>(stddev * rng.normal());
  }
  return p;
}

Tensor forward_f(const EmbedderParams& params, std::span<const float> x) {
  if (x.size() != params.config.input_dim) {
    throw Error(ErrorCode::ShapeError, "forward_f: input has " + std::to_string(x.size()) +
                                           " values, model expects " +
                                           std::to_string(params.config.input_dim));
  }
  auto refs = detail::layer_refs(params);
  detail::Trace<float> trace;
  detail::mlp_forward<float>(refs, x, trace);
  return Tensor({params.config.embed_dim}, std::move(trace.acts.back()));
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

Tensor forward_h(const EmbedderParams& params, std::span<const float> x) {
  Tensor e = forward_f(params, x);
  for (auto& v : e.data()) v = static_cast<float>(sigmoid(v));
  return e;
}

BceResult bce_loss(std::span<const float> probs, std::span<const float> targets, double eps) {
  if (probs.size() != targets.size()) throw Error(ErrorCode::ShapeError, "bce_loss: size mismatch");
  BceResult r;
  r.grad_logits.resize(probs.size());
  double loss = 0.0;
  for (std::size_t c = 0; c < probs.size(); ++c) {
    const float y = targets[c];
    if (y != 0.0f && y != 1.0f) {
      throw Error(ErrorCode::LabelError, "bce_loss: target " + std::to_string(y) + " is not binary");
    }
    const double h = std::clamp(static_cast<double>(probs[c]), eps, 1.0 - eps);
    loss -= y == 1.0f ? std::log(h) : std::log(1.0 - h);
    r.grad_logits[c] = probs[c] - y;
  }
  r.loss = loss;
  return r;
}

std::vector<float> multi_hot(std::span<const int> labels, std::size_t c) {
  std::vector<float> y(c, 0.0f);
  for (int id : labels) {
    if (id < 0 || static_cast<std::size_t>(id) >= c) {
      throw Error(ErrorCode::LabelError, "label " + std::to_string(id) + " outside 0.." +
                                             std::to_string(c - 1));
    }
    y[id] = 1.0f;
  }
  return y;
}

NetF64 NetF64::from(const EmbedderParams& params) {
  NetF64 net;
  net.dims = layer_dims(params.config);
  for (const auto& t : params.tensors) net.tensors.emplace_back(t.data().begin(), t.data().end());
  return net;
}

double bce_objective(const NetF64& net, std::span<const double> x, std::span<const double> y,
                     std::size_t rows, double eps, std::vector<std::vector<double>>* grad) {
  const std::size_t dx = net.dims.front(), de = net.dims.back();
  if (x.size() != rows * dx || y.size() != rows * de) {
    throw Error(ErrorCode::ShapeError, "bce_objective: data shape mismatch");
  }
  auto refs = layer_refs(net);
  if (grad) {
    grad->resize(net.tensors.size());
    for (std::size_t i = 0; i < net.tensors.size(); ++i) (*grad)[i].assign(net.tensors[i].size(), 0.0);
  }
  detail::Trace<double> trace;
  std::vector<double> dlogits(de);
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    detail::mlp_forward<double>(refs, x.subspan(r * dx, dx), trace);
    const auto& logits = trace.acts.back();
    for (std::size_t c = 0; c < de; ++c) {
      const double yc = y[r * de + c];
      const double p = sigmoid(logits[c]);
      const double h = std::clamp(p, eps, 1.0 - eps);
      total -= yc * std::log(h) + (1.0 - yc) * std::log(1.0 - h);
      dlogits[c] = p - yc;
    }
    if (grad) detail::mlp_backward<double>(refs, trace, dlogits, *grad);
  }
  const double n = static_cast<double>(rows);
  if (grad) {
    for (auto& g : *grad) {
      for (auto& v : g) v /= n;
    }
  }
  return total / n;
}

}  // namespace smiley
