#include <cmath>
#include <numeric>

#include "batch_sampler.hpp"
#include "mlp_core.hpp"
#include "smiley/model.hpp"
#include "smiley/optim.hpp"

namespace smiley {
namespace {

constexpr std::uint64_t kAugmentStream = 0x61756721;

Tensor row_image(const LabeledInputs& data, std::size_t row) {
  const auto& shape = *data.image_shape;
  auto r = data.inputs.row(row);
  return Tensor({shape.height, shape.width, shape.channels}, std::vector<float>(r.begin(), r.end()));
}

void validate(const LabeledInputs& data, std::size_t embed_dim, const AugmentConfig& aug) {
  if (data.size() == 0) throw Error(ErrorCode::InvalidArgument, "training set is empty");
  if (data.inputs.rank() != 2 || data.inputs.dim(0) != data.size()) {
    throw Error(ErrorCode::ShapeError, "inputs must be N x d with one row per label set");
  }
  for (const auto& labels : data.labels) {
    for (int id : labels) {
      if (id < 0 || static_cast<std::size_t>(id) >= embed_dim) {
        throw Error(ErrorCode::LabelError, "label " + std::to_string(id) + " outside the embedding");
      }
    }
  }
  if (aug.enabled()) {
    if (!data.image_shape || data.image_shape->size() != data.inputs.dim(1)) {
      throw Error(ErrorCode::AugmentError, "augmentation needs rows laid out as h x w x c images");
    }
  }
}

}  // namespace

std::size_t model_input_dim(const LabeledInputs& data, const AugmentConfig& aug) {
  if (aug.crop && data.image_shape) {
    return aug.crop->out_height * aug.crop->out_width * data.image_shape->channels;
  }
  return data.inputs.dim(1);
}

std::vector<float> eval_input(const LabeledInputs& data, std::size_t row, const AugmentConfig& aug) {
  if (aug.crop && data.image_shape) {
    Tensor c = center_crop(row_image(data, row), aug.crop->out_height, aug.crop->out_width);
    return {c.data().begin(), c.data().end()};
  }
  auto r = data.inputs.row(row);
  return {r.begin(), r.end()};
}

TrainResult train_embedder(const LabeledInputs& data, const ModelConfig& model_cfg,
                           const TrainConfig& train_cfg) {
  return train_embedder(data, init_embedder(model_cfg), train_cfg);
}

TrainResult train_embedder(const LabeledInputs& data, EmbedderParams init, const TrainConfig& cfg) {
  const std::size_t embed_dim = init.config.embed_dim;
  validate(data, embed_dim, cfg.augment);
  if (cfg.batch_size == 0) throw Error(ErrorCode::ConfigError, "batch size must be >= 1");
  if (!(cfg.prob_clamp > 0.0 && cfg.prob_clamp < 0.5)) {
    throw Error(ErrorCode::ConfigError, "probability clamp must lie in (0, 0.5)");
  }
  if (model_input_dim(data, cfg.augment) != init.config.input_dim) {
    throw Error(ErrorCode::ShapeError, "model input dimension does not match the data");
  }

  TrainResult result;
  result.params = std::move(init);
  if (cfg.iterations == 0) return result;

  AdamState adam(result.params.tensors, AdamConfig{.learning_rate = cfg.learning_rate});
  detail::BatchSampler sampler(data.size(), cfg.seed);
  Pcg32 aug_rng(cfg.seed, kAugmentStream);

  std::vector<std::vector<double>> grad_acc(result.params.tensors.size());
  std::vector<Tensor> grads;
  for (const auto& t : result.params.tensors) grads.emplace_back(t.shape());
  detail::Trace<float> trace;
  std::vector<double> dlogits(embed_dim);
  std::vector<float> probs(embed_dim);

  for (std::size_t it = 1; it <= cfg.iterations; ++it) {
    for (std::size_t i = 0; i < grad_acc.size(); ++i) {
      grad_acc[i].assign(result.params.tensors[i].size(), 0.0);
    }
    auto refs = detail::layer_refs(result.params);
    const auto batch = sampler.next(cfg.batch_size);
    double loss = 0.0;
    for (std::size_t row : batch) {
      std::vector<float> x;
      if (cfg.augment.enabled()) {
        Tensor img = augment(row_image(data, row), cfg.augment, aug_rng);
        x.assign(img.data().begin(), img.data().end());
      } else {
        auto r = data.inputs.row(row);
        x.assign(r.begin(), r.end());
      }
      detail::mlp_forward<float>(refs, x, trace);
      const auto& logits = trace.acts.back();
      for (std::size_t c = 0; c < embed_dim; ++c) probs[c] = static_cast<float>(sigmoid(logits[c]));
      auto target = multi_hot(data.labels[row], embed_dim);
      auto bce = bce_loss(probs, target, cfg.prob_clamp);
      loss += bce.loss;
      for (std::size_t c = 0; c < embed_dim; ++c) dlogits[c] = bce.grad_logits[c];
      detail::mlp_backward<float>(refs, trace, dlogits, grad_acc);
    }
    const double scale = 1.0 / static_cast<double>(batch.size());
    loss *= scale;
    if (!std::isfinite(loss)) {
      throw TrainingAborted("non-finite loss at iteration " + std::to_string(it), result.params);
    }
    for (std::size_t i = 0; i < grads.size(); ++i) {
      auto g = grads[i].data();
      for (std::size_t j = 0; j < g.size(); ++j) g[j] = static_cast<float>(grad_acc[i][j] * scale);
    }
    EmbedderParams before = result.params;
    try {
      adam_step(result.params.tensors, grads, adam);
      for (const auto& t : result.params.tensors) t.check_finite("parameters");
    } catch (const Error& e) {
      throw TrainingAborted(std::string(e.what()) + " at iteration " + std::to_string(it), std::move(before));
    }
    if ((cfg.log_every > 0 && it % cfg.log_every == 0) || it == cfg.iterations) {
      result.history.push_back({it, loss});
    }
  }
  return result;
}

Tensor predict_logits(const EmbedderParams& params, const LabeledInputs& data, const AugmentConfig& aug) {
  const std::size_t n = data.size(), c = params.config.embed_dim;
  if (n == 0) throw Error(ErrorCode::EmptyBatch, "no inputs to predict");
  std::vector<float> out(n * c);
  for (std::size_t i = 0; i < n; ++i) {
    Tensor e = forward_f(params, eval_input(data, i, aug));
    std::copy(e.data().begin(), e.data().end(), out.begin() + static_cast<std::ptrdiff_t>(i * c));
  }
  return Tensor({n, c}, std::move(out));
}

Tensor predict_probabilities(const EmbedderParams& params, const LabeledInputs& data,
                             const AugmentConfig& aug) {
  Tensor logits = predict_logits(params, data, aug);
  for (auto& v : logits.data()) v = static_cast<float>(sigmoid(v));
  return logits;
}

}  // namespace smiley
