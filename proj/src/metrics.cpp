#include "smiley/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "smiley/error.hpp"
#include "smiley/rng.hpp"
#include "smiley/text.hpp"

namespace smiley {

PredictionBatch PredictionBatch::from(const Tensor& scores, std::span<const std::vector<int>> labels) {
  if (scores.rank() != 2 || scores.dim(0) != labels.size()) {
    throw Error(ErrorCode::ShapeError, "prediction batch: score rows do not match labels");
  }
  PredictionBatch b;
  b.rows = scores.dim(0);
  b.cols = scores.dim(1);
  b.scores.assign(scores.data().begin(), scores.data().end());
  b.truth.assign(b.rows * b.cols, 0);
  for (std::size_t i = 0; i < b.rows; ++i) {
    for (int c : labels[i]) {
      if (c < 0 || static_cast<std::size_t>(c) >= b.cols) {
        throw Error(ErrorCode::LabelError, "label " + std::to_string(c) + " out of range");
      }
      b.truth[i * b.cols + c] = 1;
    }
  }
  return b;
}

std::vector<std::size_t> top_k_indices(std::span<const double> scores, std::size_t k) {
  if (k < 1 || k > scores.size()) throw Error(ErrorCode::InvalidArgument, "top-k: k out of range");
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  idx.resize(k);
  return idx;
}

std::size_t mtopk_hits(std::span<const double> scores, std::span<const std::uint8_t> truth, std::size_t k) {
  if (scores.size() != truth.size()) throw Error(ErrorCode::ShapeError, "mtopk: size mismatch");
  std::size_t hits = 0;
  for (auto i : top_k_indices(scores, k)) hits += truth[i] ? 1 : 0;
  return hits;
}

double mtopk_single(std::span<const double> scores, std::span<const std::uint8_t> truth, std::size_t k) {
  const auto positives = static_cast<std::size_t>(std::count_if(truth.begin(), truth.end(), [](auto v) { return v != 0; }));
  if (positives == 0) throw Error(ErrorCode::NoGroundTruth, "mtopk: row has no positive label");
  return static_cast<double>(mtopk_hits(scores, truth, k)) / static_cast<double>(std::min(k, positives));
}

MTopK mtopk(const PredictionBatch& batch, std::size_t k) {
  MTopK r;
  double sum = 0.0;
  for (std::size_t i = 0; i < batch.rows; ++i) {
    auto truth = batch.truth_row(i);
    if (std::none_of(truth.begin(), truth.end(), [](auto v) { return v != 0; })) {
      ++r.excluded;
      continue;
    }
    sum += mtopk_single(batch.score_row(i), truth, k);
    ++r.evaluated;
  }
  if (r.evaluated == 0) throw Error(ErrorCode::EmptyBatch, "mtopk: no rows with ground truth");
  r.value = sum / static_cast<double>(r.evaluated);
  return r;
}

double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw Error(ErrorCode::ShapeError, "roc_auc: size mismatch");
  if (std::any_of(scores.begin(), scores.end(), [](double v) { return std::isnan(v); })) {
    throw Error(ErrorCode::NumericError, "roc_auc: NaN score");
  }
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
    for (std::size_t t = i; t <= j; ++t) {
      if (labels[order[t]]) {
        positive_rank_sum += avg_rank;
        ++positives;
      }
    }
    i = j + 1;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw Error(ErrorCode::DegenerateClass, "roc_auc needs both positive and negative labels");
  }
  const double p = static_cast<double>(positives), q = static_cast<double>(negatives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

MacroAuc macro_auc(const PredictionBatch& batch) {
  MacroAuc r;
  std::vector<double> col(batch.rows);
  std::vector<std::uint8_t> lab(batch.rows);
  double sum = 0.0;
  for (std::size_t c = 0; c < batch.cols; ++c) {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < batch.rows; ++i) {
      col[i] = batch.scores[i * batch.cols + c];
      lab[i] = batch.truth[i * batch.cols + c];
      pos += lab[i] ? 1 : 0;
    }
    if (pos == 0 || pos == batch.rows) {
      ++r.skipped;
      continue;
    }
    sum += roc_auc(col, lab);
    ++r.evaluated;
  }
  if (r.evaluated > 0) r.value = sum / static_cast<double>(r.evaluated);
  return r;
}

double accuracy(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) throw Error(ErrorCode::ShapeError, "accuracy: size mismatch");
  if (labels.empty()) throw Error(ErrorCode::EmptyBatch, "accuracy of an empty batch");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += predictions[i] == labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

std::size_t ConfusionMatrix::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels, std::size_t classes) {
  if (predictions.size() != labels.size()) throw Error(ErrorCode::ShapeError, "confusion: size mismatch");
  if (labels.empty()) throw Error(ErrorCode::EmptyBatch, "confusion of an empty batch");
  ConfusionMatrix cm{classes, std::vector<std::size_t>(classes * classes, 0)};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int t = labels[i], p = predictions[i];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= classes || static_cast<std::size_t>(p) >= classes) {
      throw Error(ErrorCode::LabelError, "confusion: class out of range at row " + std::to_string(i));
    }
    ++cm.counts[static_cast<std::size_t>(t) * classes + static_cast<std::size_t>(p)];
  }
  return cm;
}

std::vector<int> argmax_rows(const Tensor& scores) {
  if (scores.rank() != 2) throw Error(ErrorCode::ShapeError, "argmax_rows needs a matrix");
  std::vector<int> out(scores.dim(0));
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto row = scores.row(i);
    out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

int knn_classify(const Matrix& train, std::span<const int> train_labels, std::span<const double> query, std::size_t k) {
  if (train.rows == 0) throw Error(ErrorCode::InvalidArgument, "knn: empty training set");
  if (train_labels.size() != train.rows || query.size() != train.cols) {
    throw Error(ErrorCode::ShapeError, "knn: shape mismatch");
  }
  k = std::clamp<std::size_t>(k, 1, train.rows);
  std::vector<std::pair<double, std::size_t>> dist(train.rows);
  for (std::size_t i = 0; i < train.rows; ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < train.cols; ++j) {
      const double diff = train(i, j) - query[j];
      d += diff * diff;
    }
    dist[i] = {d, i};
  }
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  if (k == 1) return train_labels[dist[0].second];

  std::vector<std::pair<int, std::size_t>> votes;  // (label, count) in order of first appearance
  for (std::size_t i = 0; i < k; ++i) {
    const int label = train_labels[dist[i].second];
    auto it = std::find_if(votes.begin(), votes.end(), [&](const auto& v) { return v.first == label; });
    if (it == votes.end()) {
      votes.emplace_back(label, 1);
    } else {
      ++it->second;
    }
  }
  auto best = votes.begin();
  for (auto it = votes.begin(); it != votes.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorCode::FoldError, "need at least 2 folds");
  if (folds > n) throw Error(ErrorCode::FoldError, std::to_string(folds) + " folds for " + std::to_string(n) + " items");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Pcg32 rng(seed, 0x6b666f6c64);
  rng.shuffle(std::span(perm));
  std::vector<std::vector<std::size_t>> out(folds);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t size = n / folds + (f < n % folds ? 1 : 0);
    out[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos), perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(out[f].begin(), out[f].end());
    pos += size;
  }
  return out;
}

KFoldResult kfold_cv(std::size_t n, std::size_t folds, std::uint64_t seed, const FoldEvaluator& eval) {
  auto parts = kfold_partition(n, folds, seed);
  KFoldResult r;
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train;
    for (std::size_t g = 0; g < folds; ++g) {
      if (g != f) train.insert(train.end(), parts[g].begin(), parts[g].end());
    }
    std::sort(train.begin(), train.end());
    r.per_fold.push_back(eval(train, parts[f]));
  }
  r.mean = std::accumulate(r.per_fold.begin(), r.per_fold.end(), 0.0) / static_cast<double>(folds);
  return r;
}

std::string metric_csv(std::span<const MetricRow> rows) {
  std::string out = "metric,k_or_class,value\n";
  for (const auto& r : rows) out += csv_escape(r.metric) + "," + csv_escape(r.key) + "," + format_double(r.value) + "\n";
  return out;
}

std::string confusion_csv(const ConfusionMatrix& cm, std::span<const std::string> class_names) {
  if (class_names.size() != cm.classes) throw Error(ErrorCode::ShapeError, "confusion_csv: name count mismatch");
  std::string out = "true\\predicted";
  for (const auto& n : class_names) out += "," + csv_escape(n);
  out += "\n";
  for (std::size_t t = 0; t < cm.classes; ++t) {
    out += csv_escape(class_names[t]);
    for (std::size_t p = 0; p < cm.classes; ++p) out += "," + std::to_string(cm.at(t, p));
    out += "\n";
  }
  return out;
}

}  // namespace smiley
