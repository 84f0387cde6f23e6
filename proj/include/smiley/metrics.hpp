#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "smiley/linalg.hpp"
#include "smiley/tensor.hpp"

namespace smiley {

/// N x C scores with binary ground truth.
struct PredictionBatch {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> scores;
  std::vector<std::uint8_t> truth;

  static PredictionBatch from(const Tensor& scores, std::span<const std::vector<int>> labels);

  std::span<const double> score_row(std::size_t i) const { return std::span(scores).subspan(i * cols, cols); }
  std::span<const std::uint8_t> truth_row(std::size_t i) const { return std::span(truth).subspan(i * cols, cols); }
};

/// Indices of the k highest scores; ties go to the lower index.
std::vector<std::size_t> top_k_indices(std::span<const double> scores, std::size_t k);

/// |top_k(p) ∩ {c : y_c = 1}|.
std::size_t mtopk_hits(std::span<const double> scores, std::span<const std::uint8_t> truth, std::size_t k);

/// Hits over min(k, |ground truth|). NoGroundTruth for an all-negative row.
double mtopk_single(std::span<const double> scores, std::span<const std::uint8_t> truth, std::size_t k);

struct MTopK {
  double value = 0.0;
  std::size_t evaluated = 0;
  std::size_t excluded = 0;  // rows without any positive label
};

/// Mean of mtopk_single over rows with ground truth. EmptyBatch when there
/// are none.
MTopK mtopk(const PredictionBatch& batch, std::size_t k);

/// Mann-Whitney AUC with average ranks (tied pairs count 1/2).
/// DegenerateClass unless both label values occur.
double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct MacroAuc {
  double value = 0.0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;  // classes lacking a positive or a negative
};

MacroAuc macro_auc(const PredictionBatch& batch);

double accuracy(std::span<const int> predictions, std::span<const int> labels);

struct ConfusionMatrix {
  std::size_t classes = 0;
  std::vector<std::size_t> counts;  // row = true class, column = predicted

  std::size_t at(std::size_t truth, std::size_t predicted) const { return counts[truth * classes + predicted]; }
  std::size_t total() const;
};

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels, std::size_t classes);

/// Row-wise argmax (ties to the lower index).
std::vector<int> argmax_rows(const Tensor& scores);

/// Majority vote over the k nearest rows by Euclidean distance; distance
/// ties go to the lower row index, vote ties to the class of the nearer row.
int knn_classify(const Matrix& train, std::span<const int> train_labels, std::span<const double> query,
                 std::size_t k = 1);

/// Seeded partition of 0..n-1 into `folds` near-equal parts.
std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t folds, std::uint64_t seed);

struct KFoldResult {
  std::vector<double> per_fold;
  double mean = 0.0;
};

using FoldEvaluator = std::function<double(std::span<const std::size_t> train, std::span<const std::size_t> test)>;

KFoldResult kfold_cv(std::size_t n, std::size_t folds, std::uint64_t seed, const FoldEvaluator& eval);

/// Rows for a `metric,k_or_class,value` CSV.
struct MetricRow {
  std::string metric;
  std::string key;
  double value = 0.0;
};

std::string metric_csv(std::span<const MetricRow> rows);
std::string confusion_csv(const ConfusionMatrix& cm, std::span<const std::string> class_names);

}  // namespace smiley
