#include <algorithm>
#include <cmath>

#include "batch_sampler.hpp"
#include "mlp_core.hpp"
#include "smiley/model.hpp"
#include "smiley/optim.hpp"

namespace smiley {
namespace {

std::vector<double> head_logits(const TransferHead& head, std::span<const float> embedding) {
  const std::size_t de = head.weight.dim(0), k = head.outputs();
  if (embedding.size() != de) throw Error(ErrorCode::ShapeError, "transfer head: embedding size mismatch");
  std::vector<double> z(k);
  for (std::size_t t = 0; t < k; ++t) {
    double acc = head.bias[t];
    for (std::size_t e = 0; e < de; ++e) acc += double(head.weight.at(e, t)) * double(embedding[e]);
    z[t] = acc;
  }
  return z;
}

// Probabilities over the head's outputs, plus d(loss)/d(z) for `label`.
double head_loss(const TransferHead& head, std::span<const double> z, int label, double eps,
                 std::vector<double>& dz) {
  dz.resize(z.size());
  if (head.activation == HeadActivation::Sigmoid) {
    const double p = sigmoid(z[0]);
    const double y = label == 1 ? 1.0 : 0.0;
    const double pc = std::clamp(p, eps, 1.0 - eps);
    dz[0] = p - y;
    return -(y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
  }
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (std::size_t t = 0; t < z.size(); ++t) sum += std::exp(z[t] - zmax);
  for (std::size_t t = 0; t < z.size(); ++t) dz[t] = std::exp(z[t] - zmax) / sum;
  const double p_true = std::max(dz[label], eps);
  dz[label] -= 1.0;
  return -std::log(p_true);
}

}  // namespace

TransferHead zero_head(std::size_t embed_dim, std::size_t classes, HeadActivation act) {
  if (act == HeadActivation::Softmax && classes < 2) {
    throw Error(ErrorCode::ConfigError, "softmax head needs at least 2 classes");
  }
  if (act == HeadActivation::Sigmoid && classes != 2) {
    throw Error(ErrorCode::ConfigError, "sigmoid head is binary (2 classes)");
  }
  const std::size_t outputs = act == HeadActivation::Softmax ? classes : 1;
  TransferHead head;
  head.weight = Tensor({embed_dim, outputs});
  head.bias = Tensor({outputs});
  head.activation = act;
  return head;
}

std::vector<double> head_probabilities(const TransferHead& head, std::span<const float> embedding) {
  auto z = head_logits(head, embedding);
  if (head.activation == HeadActivation::Sigmoid) {
    const double p = sigmoid(z[0]);
    return {1.0 - p, p};
  }
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (auto& v : z) sum += (v = std::exp(v - zmax));
  for (auto& v : z) v /= sum;
  return z;
}

int predict_class(const EmbedderParams& f, const TransferHead& head, std::span<const float> x) {
  Tensor e = forward_f(f, x);
  auto p = head_probabilities(head, e.data());
  if (head.activation == HeadActivation::Sigmoid) return p[1] >= 0.5 ? 1 : 0;
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

TransferResult train_transfer(const EmbedderParams& f, const Tensor& inputs, std::span<const int> labels,
                              const TransferConfig& cfg) {
  const std::size_t n = labels.size();
  const std::size_t de = f.config.embed_dim;
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "transfer set is empty");
  if (inputs.rank() != 2 || inputs.dim(0) != n || inputs.dim(1) != f.config.input_dim) {
    throw Error(ErrorCode::ShapeError, "transfer inputs must be N x d_x");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= cfg.classes) {
      throw Error(ErrorCode::LabelError, "target label " + std::to_string(y) + " out of range");
    }
  }
  if (cfg.train.batch_size == 0) throw Error(ErrorCode::ConfigError, "batch size must be >= 1");

  TransferResult result;
  result.head = zero_head(de, cfg.classes, cfg.activation);
  result.embedder = f;
  if (cfg.train.iterations == 0) return result;

  const bool finetune = cfg.mode == TransferMode::Finetune;
  const AdamConfig adam_cfg{.learning_rate = cfg.train.learning_rate};
  std::vector<Tensor> head_params{result.head.weight, result.head.bias};
  AdamState head_adam(head_params, adam_cfg);
  AdamState body_adam;
  if (finetune) body_adam = AdamState(result.embedder.tensors, adam_cfg);

  // With f frozen the embeddings never change, so compute them once.
  std::vector<std::vector<float>> frozen_embeddings;
  if (!finetune) {
    frozen_embeddings.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      Tensor e = forward_f(f, inputs.row(i));
      frozen_embeddings.emplace_back(e.data().begin(), e.data().end());
    }
  }

  detail::BatchSampler sampler(n, cfg.train.seed);
  detail::Trace<float> trace;
  std::vector<double> dz;
  std::vector<std::vector<double>> body_acc(result.embedder.tensors.size());
  std::vector<Tensor> body_grads;
  if (finetune) {
    for (const auto& t : result.embedder.tensors) body_grads.emplace_back(t.shape());
  }
  std::vector<double> gw(de * result.head.outputs()), gb(result.head.outputs());

  for (std::size_t it = 1; it <= cfg.train.iterations; ++it) {
    std::fill(gw.begin(), gw.end(), 0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
    if (finetune) {
      for (std::size_t i = 0; i < body_acc.size(); ++i) body_acc[i].assign(result.embedder.tensors[i].size(), 0.0);
    }
    auto refs = detail::layer_refs(result.embedder);
    const auto batch = sampler.next(cfg.train.batch_size);
    double loss = 0.0;
    std::vector<float> embedding;
    for (std::size_t row : batch) {
      if (finetune) {
        detail::mlp_forward<float>(refs, inputs.row(row), trace);
        embedding = trace.acts.back();
      } else {
        embedding = frozen_embeddings[row];
      }
      auto z = head_logits(result.head, embedding);
      loss += head_loss(result.head, z, labels[row], cfg.train.prob_clamp, dz);
      const std::size_t k = z.size();
      for (std::size_t t = 0; t < k; ++t) {
        gb[t] += dz[t];
        for (std::size_t e = 0; e < de; ++e) gw[e * k + t] += dz[t] * embedding[e];
      }
      if (finetune) {
        std::vector<double> de_grad(de, 0.0);
        for (std::size_t e = 0; e < de; ++e) {
          for (std::size_t t = 0; t < k; ++t) de_grad[e] += double(result.head.weight.at(e, t)) * dz[t];
        }
        detail::mlp_backward<float>(refs, trace, de_grad, body_acc);
      }
    }
    const double scale = 1.0 / static_cast<double>(batch.size());
    loss *= scale;
    if (!std::isfinite(loss)) {
      throw TrainingAborted("non-finite transfer loss at iteration " + std::to_string(it), result.embedder);
    }
    std::vector<Tensor> head_grads{Tensor(result.head.weight.shape()), Tensor(result.head.bias.shape())};
    for (std::size_t i = 0; i < gw.size(); ++i) head_grads[0][i] = static_cast<float>(gw[i] * scale);
    for (std::size_t i = 0; i < gb.size(); ++i) head_grads[1][i] = static_cast<float>(gb[i] * scale);
    adam_step(head_params, head_grads, head_adam);
    result.head.weight = head_params[0];
    result.head.bias = head_params[1];
    if (finetune) {
      for (std::size_t i = 0; i < body_grads.size(); ++i) {
        auto g = body_grads[i].data();
        for (std::size_t j = 0; j < g.size(); ++j) g[j] = static_cast<float>(body_acc[i][j] * scale);
      }
      adam_step(result.embedder.tensors, body_grads, body_adam);
    }
    if ((cfg.train.log_every > 0 && it % cfg.train.log_every == 0) || it == cfg.train.iterations) {
      result.history.push_back({it, loss});
    }
  }
  return result;
}

}  // namespace smiley
