#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smiley/emoji_core.hpp"
#include "smiley/error.hpp"
#include "smiley/rng.hpp"
#include "smiley/tensor.hpp"

namespace smiley {

enum class Activation : std::uint8_t { Relu = 0 };

struct ModelConfig {
  std::size_t input_dim = 0;  // d_x: flattened H*W*channels
  std::size_t embed_dim = 0;  // d_e: equals the taxonomy size
  std::vector<std::size_t> hidden;
  Activation activation = Activation::Relu;
  double init_scale = 1.0;
  std::uint64_t seed = 0;

  bool operator==(const ModelConfig&) const = default;
};

/// Parameters of the embedding network f. Tensors are stored as
/// [W0, b0, W1, b1, ...] with W_l shaped (out x in).
struct EmbedderParams {
  ModelConfig config;
  std::vector<Tensor> tensors;

  std::size_t layer_count() const { return tensors.size() / 2; }
  const Tensor& weight(std::size_t l) const { return tensors[2 * l]; }
  const Tensor& bias(std::size_t l) const { return tensors[2 * l + 1]; }
  Tensor& weight(std::size_t l) { return tensors[2 * l]; }
  Tensor& bias(std::size_t l) { return tensors[2 * l + 1]; }

  bool operator==(const EmbedderParams&) const = default;
};

/// Layer widths d_x, hidden..., d_e.
std::vector<std::size_t> layer_dims(const ModelConfig& cfg);

/// He-style init scaled by cfg.init_scale from a PCG32 stream of cfg.seed;
/// biases start at zero.
EmbedderParams init_embedder(const ModelConfig& cfg);
/// All parameters zero (shapes from cfg).
EmbedderParams zero_embedder(const ModelConfig& cfg);

/// f(x): affine + ReLU chain, final layer affine only (logits).
Tensor forward_f(const EmbedderParams& params, std::span<const float> x);
/// h(x) = sigmoid(f(x)).
Tensor forward_h(const EmbedderParams& params, std::span<const float> x);

double sigmoid(double z);

struct BceResult {
  double loss = 0.0;
  std::vector<float> grad_logits;  // h - y
};

/// Full binary cross-entropy on probabilities clamped to [eps, 1 - eps].
/// Throws LabelError when y is not binary.
BceResult bce_loss(std::span<const float> probs, std::span<const float> targets, double eps = 1e-7);

/// Multi-hot target vector of length c.
std::vector<float> multi_hot(std::span<const int> labels, std::size_t c);

// ---------------------------------------------------------------------------
// Double-precision view of the same network, used for gradient verification.

struct NetF64 {
  std::vector<std::size_t> dims;
  std::vector<std::vector<double>> tensors;  // same layout as EmbedderParams

  static NetF64 from(const EmbedderParams& params);
};

/// Mean per-sample BCE over the rows of x/y (row-major, dims.front() and
/// dims.back() wide). Fills grad (same layout as tensors) when non-null.
double bce_objective(const NetF64& net, std::span<const double> x, std::span<const double> y,
                     std::size_t rows, double eps, std::vector<std::vector<double>>* grad);

// ---------------------------------------------------------------------------
// Training.

struct ImageShape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;

  std::size_t size() const { return height * width * channels; }
  bool operator==(const ImageShape&) const = default;
};

struct CropConfig {
  std::size_t out_height = 0;
  std::size_t out_width = 0;
  double scale_min = 1.0;
  double scale_max = 1.25;
};

struct AugmentConfig {
  bool hflip = false;
  std::optional<CropConfig> crop;

  bool enabled() const { return hflip || crop.has_value(); }
};

/// Mirrors columns of an h x w x c image.
Tensor hflip(const Tensor& image);
/// Nearest-neighbour resize of an h x w x c image.
Tensor resize_nearest(const Tensor& image, std::size_t out_h, std::size_t out_w);
Tensor crop(const Tensor& image, std::size_t top, std::size_t left, std::size_t out_h, std::size_t out_w);
Tensor center_crop(const Tensor& image, std::size_t out_h, std::size_t out_w);

/// Random flip (p = 0.5), then random scale in [scale_min, scale_max] and a
/// uniformly placed crop. AugmentError when the crop exceeds the image.
Tensor augment(const Tensor& image, const AugmentConfig& cfg, Pcg32& rng);

/// In-memory training set: one flattened input per row.
struct LabeledInputs {
  Tensor inputs;  // N x input size
  std::vector<std::vector<int>> labels;
  std::optional<ImageShape> image_shape;  // required for augmentation

  std::size_t size() const { return labels.size(); }
};

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t batch_size = 128;
  std::size_t iterations = 1000;
  std::size_t log_every = 100;
  AugmentConfig augment;
  std::uint64_t seed = 0;
  double prob_clamp = 1e-7;
};

struct LossPoint {
  std::size_t iteration = 0;
  double loss = 0.0;
};

struct TrainResult {
  EmbedderParams params;
  std::vector<LossPoint> history;
};

/// Raised when a batch loss goes non-finite; carries the last good params.
class TrainingAborted : public Error {
 public:
  TrainingAborted(const std::string& what, EmbedderParams last_good)
      : Error(ErrorCode::NumericError, what), last_good_(std::move(last_good)) {}
  const EmbedderParams& last_good() const noexcept { return last_good_; }

 private:
  EmbedderParams last_good_;
};

/// Model input for a stored row: the center crop when cropping is enabled,
/// otherwise the row itself.
std::vector<float> eval_input(const LabeledInputs& data, std::size_t row, const AugmentConfig& aug);
/// Input dimension the network sees for this data/augmentation pair.
std::size_t model_input_dim(const LabeledInputs& data, const AugmentConfig& aug);

/// Mini-batch Adam on mean per-sample BCE, seeded shuffles each epoch.
TrainResult train_embedder(const LabeledInputs& data, const ModelConfig& model_cfg,
                           const TrainConfig& train_cfg);
/// Continues training from given parameters.
TrainResult train_embedder(const LabeledInputs& data, EmbedderParams init, const TrainConfig& train_cfg);

/// sigmoid(f(x)) for every stored row (center-cropped when cropping).
Tensor predict_probabilities(const EmbedderParams& params, const LabeledInputs& data,
                             const AugmentConfig& aug = {});
/// f(x) for every stored row.
Tensor predict_logits(const EmbedderParams& params, const LabeledInputs& data,
                      const AugmentConfig& aug = {});

// ---------------------------------------------------------------------------
// Transfer head t, g = t o f.

enum class HeadActivation : std::uint8_t { Softmax = 0, Sigmoid = 1 };
enum class TransferMode { Frozen, Finetune };

struct TransferHead {
  Tensor weight;  // d_e x outputs
  Tensor bias;    // outputs
  HeadActivation activation = HeadActivation::Softmax;

  std::size_t outputs() const { return bias.size(); }
  /// Number of target classes: outputs for softmax, 2 for a sigmoid head.
  std::size_t classes() const { return activation == HeadActivation::Softmax ? outputs() : 2; }
  bool operator==(const TransferHead&) const = default;
};

/// Softmax heads need >= 2 classes; a sigmoid head is a single binary unit.
TransferHead zero_head(std::size_t embed_dim, std::size_t classes, HeadActivation act);

/// Class probabilities of g(x) (length classes(); sigmoid heads give [1-p, p]).
std::vector<double> head_probabilities(const TransferHead& head, std::span<const float> embedding);
int predict_class(const EmbedderParams& f, const TransferHead& head, std::span<const float> x);

struct TransferConfig {
  std::size_t classes = 2;
  HeadActivation activation = HeadActivation::Softmax;
  TransferMode mode = TransferMode::Frozen;
  TrainConfig train;
};

struct TransferResult {
  TransferHead head;
  EmbedderParams embedder;
  std::vector<LossPoint> history;
};

/// Cross-entropy (softmax) or BCE (sigmoid) on g(x). Frozen mode updates
/// only the head; finetune also updates f.
TransferResult train_transfer(const EmbedderParams& f, const Tensor& inputs, std::span<const int> labels,
                              const TransferConfig& cfg);

// ---------------------------------------------------------------------------
// Zero-shot sentiment.

enum class ZslMode { Binary, Continuous };

/// Per-category weights: +-1 from base sentiment (Binary) or the signed
/// annotation weight (Continuous). AnnotationError on a missing annotation.
std::vector<double> zsl_weights(const EmojiTaxonomy& tax, ZslMode mode);
/// S = sum_c w_c * sigmoid(e_c).
double zsl_score(std::span<const float> logits, std::span<const double> weights);
/// Positive iff S >= 0.
Sentiment zsl_predict(std::span<const float> logits, const EmojiTaxonomy& tax, ZslMode mode);

// ---------------------------------------------------------------------------
// Checkpoints.

struct Checkpoint {
  EmbedderParams embedder;
  std::optional<TransferHead> head;
  std::array<std::uint8_t, 32> taxonomy_hash{};
  std::uint64_t seed = 0;
};

std::string encode_checkpoint(const EmbedderParams& params, const TransferHead* head,
                              const EmojiTaxonomy& tax, std::uint64_t seed);
/// ParseError on malformed/truncated bytes; CompatibilityError when the
/// taxonomy hash differs from tax.
Checkpoint decode_checkpoint(std::string_view bytes, const EmojiTaxonomy& tax);

void save_checkpoint(const std::filesystem::path& path, const EmbedderParams& params,
                     const TransferHead* head, const EmojiTaxonomy& tax, std::uint64_t seed);
Checkpoint load_checkpoint(const std::filesystem::path& path, const EmojiTaxonomy& tax);

// ---------------------------------------------------------------------------
// Images: binary PPM (P6, maxval 255) <-> h x w x 3 tensors in [0, 1].

Tensor load_ppm(const std::filesystem::path& path);
Tensor decode_ppm(std::string_view bytes);
std::string encode_ppm(const Tensor& image);
void save_ppm(const std::filesystem::path& path, const Tensor& image);

}  // namespace smiley
