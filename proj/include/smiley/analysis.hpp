#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smiley/emoji_core.hpp"
#include "smiley/linalg.hpp"
#include "smiley/tensor.hpp"

namespace smiley {

/// 1-based ranks; tied values share the mean of their rank span.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of average ranks. nullopt when either input is
/// constant; InvalidArgument for N < 3 or mismatched lengths.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

/// Per-column Spearman between probs (N x C) and a binary label.
/// DegenerateClass unless both label values occur.
std::vector<std::optional<double>> correlate_dimensions(const Tensor& probs, std::span<const std::uint8_t> labels);

/// C x E one-vs-rest Spearman matrix between emoji probabilities and
/// emotion classes.
struct FingerprintMatrix {
  std::size_t categories = 0;
  std::vector<std::string> emotion_names;
  std::vector<std::optional<double>> values;  // row-major C x E

  std::size_t emotions() const { return emotion_names.size(); }
  const std::optional<double>& at(std::size_t c, std::size_t e) const { return values[c * emotions() + e]; }
  std::vector<std::optional<double>> column(std::size_t e) const;
  /// Emotion with the largest defined value in row c (lowest index on ties).
  std::optional<std::size_t> argmax_emotion(std::size_t c) const;
};

/// DegenerateClass when an emotion has fewer than 3 samples.
FingerprintMatrix fingerprint(const Tensor& probs, std::span<const int> emotion_labels,
                              std::vector<std::string> emotion_names);

struct RankedEntry {
  int id = 0;
  double value = 0.0;

  bool operator==(const RankedEntry&) const = default;
};

/// Descending by value, ties by ascending id, undefined entries dropped,
/// n clipped to the number of defined entries.
std::vector<RankedEntry> rank_top(std::span<const std::optional<double>> values, std::size_t n = 7);
std::vector<RankedEntry> rank_top(std::span<const double> values, std::size_t n = 7);

struct ProjectionResult {
  Matrix coords;  // N x 2
  std::vector<int> labels;
  PcaResult pca;
};

/// PCA (k = 2) of N x C embeddings; N >= 3.
ProjectionResult project_2d(const Tensor& embeddings, std::span<const int> labels);

std::string fingerprint_csv(const FingerprintMatrix& f, const EmojiTaxonomy& tax);
std::string projection_csv(const ProjectionResult& p, std::span<const std::string> sample_ids);
/// Scatter plot on a fixed 800x800 viewBox, one colour per label.
std::string projection_svg(const ProjectionResult& p, std::span<const std::string> label_names);

}  // namespace smiley
