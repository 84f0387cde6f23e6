#include "smiley/model.hpp"

namespace smiley {

std::vector<double> zsl_weights(const EmojiTaxonomy& tax, ZslMode mode) {
  std::vector<double> w;
  w.reserve(tax.size());
  for (const auto& cat : tax.categories()) {
    if (mode == ZslMode::Binary) {
      if (!cat.base_sentiment) {
        throw Error(ErrorCode::AnnotationError, "category '" + cat.name + "' has no base sentiment");
      }
      w.push_back(*cat.base_sentiment == Sentiment::Positive ? 1.0 : -1.0);
    } else {
      if (!cat.zsl_weight) {
        throw Error(ErrorCode::AnnotationError, "category '" + cat.name + "' has no zsl weight");
      }
      w.push_back(*cat.zsl_weight);
    }
  }
  return w;
}

double zsl_score(std::span<const float> logits, std::span<const double> weights) {
  if (logits.size() != weights.size()) throw Error(ErrorCode::ShapeError, "zsl: weight/score size mismatch");
  double s = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) s += weights[c] * sigmoid(logits[c]);
  return s;
}

Sentiment zsl_predict(std::span<const float> logits, const EmojiTaxonomy& tax, ZslMode mode) {
  auto w = zsl_weights(tax, mode);
  return zsl_score(logits, w) >= 0.0 ? Sentiment::Positive : Sentiment::Negative;
}

}  // namespace smiley
