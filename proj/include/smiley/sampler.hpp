#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "smiley/corpus.hpp"
#include "smiley/emoji_core.hpp"
#include "smiley/linalg.hpp"

namespace smiley {

using Date = std::chrono::sys_days;

/// Parses YYYY-MM-DD; ParseError on malformed or impossible dates.
Date parse_date(std::string_view text);
std::string format_date(Date d);
std::int64_t epoch_seconds(Date d);

/// [start, end) in epoch seconds.
struct WindowSpec {
  std::int64_t start = 0;
  std::int64_t end = 0;
  int index = 0;

  bool operator==(const WindowSpec&) const = default;
};

struct SamplerConfig {
  int window_days = 30;
  std::size_t per_category_cap = 4000;
  Date range_start{};
  Date range_end{};  // inclusive day
  std::uint64_t seed = 0;
};

/// Contiguous windows from range_start 00:00 UTC, the last one truncated at
/// range_end 24:00 UTC. InvalidRange when range_end < range_start.
std::vector<WindowSpec> partition_windows(Date range_start, Date range_end, int window_days);

struct CellStats {
  std::size_t seen = 0;      // distinct tweets labelled c in window w
  std::size_t selected = 0;  // tweets kept by the (w, c) reservoir
};

struct BalancedSampleResult {
  std::vector<Sample> dataset;  // sorted by sample_id, window_id set
  std::map<std::pair<int, int>, CellStats> cells;  // (window, category)
  std::size_t tweets_seen = 0;
  std::size_t tweets_kept = 0;
};

/// Per (window, category) reservoir sampling of tweets, at most
/// per_category_cap per cell, seeded by (seed, window, category). A tweet
/// chosen by any of its cells is kept once with every image and its full
/// label set. OutOfRange for timestamps outside the configured range.
BalancedSampleResult balanced_sample(std::span<const Sample> samples, std::size_t num_categories,
                                     const SamplerConfig& cfg);

struct LabelStats {
  std::vector<std::size_t> counts;
  std::size_t total_samples = 0;
  std::size_t total_labels = 0;
};

LabelStats label_distribution(std::span<const Sample> dataset, std::size_t num_categories);

/// M[i][j] = P(j in labels | i in labels); zero rows for absent categories.
Matrix cooccurrence_matrix(std::span<const Sample> dataset, std::size_t num_categories);

struct DatasetSplit {
  std::vector<Sample> train;
  std::vector<Sample> val;
  std::vector<Sample> test;
  std::vector<int> empty_categories;  // categories with no samples at all
};

/// Greedy per-category draw, rarest category first, targeting the given
/// number of val/test samples containing each category. A drawn sample
/// counts toward all of its labels.
DatasetSplit split_dataset(std::span<const Sample> dataset, std::size_t num_categories,
                           std::size_t val_per_class, std::size_t test_per_class, std::uint64_t seed);

std::string label_stats_csv(const LabelStats& stats, const EmojiTaxonomy& tax);
std::string cooccurrence_csv(const Matrix& m, const EmojiTaxonomy& tax);

}  // namespace smiley
