#include "smiley/sampler.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "smiley/error.hpp"
#include "smiley/rng.hpp"
#include "smiley/text.hpp"

namespace smiley {
namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

void check_labels(const Sample& s, std::size_t num_categories) {
  for (int id : s.label_set) {
    if (id < 0 || static_cast<std::size_t>(id) >= num_categories) {
      throw Error(ErrorCode::LabelError, s.sample_id + ": label " + std::to_string(id) + " out of range");
    }
  }
}

bool has_label(const Sample& s, int c) { return std::binary_search(s.label_set.begin(), s.label_set.end(), c); }

}  // namespace

Date parse_date(std::string_view text) {
  text = trim(text);
  auto parts = split(text, '-');
  if (parts.size() != 3 || parts[0].size() != 4 || parts[1].size() != 2 || parts[2].size() != 2) {
    throw Error(ErrorCode::ParseError, "expected YYYY-MM-DD, got '" + std::string(text) + "'");
  }
  auto y = parse_int(parts[0]), m = parse_int(parts[1]), d = parse_int(parts[2]);
  if (!y || !m || !d) throw Error(ErrorCode::ParseError, "bad date '" + std::string(text) + "'");
  std::chrono::year_month_day ymd{std::chrono::year(static_cast<int>(*y)),
                                  std::chrono::month(static_cast<unsigned>(*m)),
                                  std::chrono::day(static_cast<unsigned>(*d))};
  if (!ymd.ok()) throw Error(ErrorCode::ParseError, "invalid date '" + std::string(text) + "'");
  return Date(ymd);
}

std::string format_date(Date d) {
  std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::int64_t epoch_seconds(Date d) { return static_cast<std::int64_t>(d.time_since_epoch().count()) * kSecondsPerDay; }

std::vector<WindowSpec> partition_windows(Date range_start, Date range_end, int window_days) {
  if (window_days < 1) throw Error(ErrorCode::ConfigError, "window_days must be >= 1");
  if (range_end < range_start) {
    throw Error(ErrorCode::InvalidRange, format_date(range_start) + " is after " + format_date(range_end));
  }
  const std::int64_t start = epoch_seconds(range_start);
  const std::int64_t end = epoch_seconds(range_end) + kSecondsPerDay;
  const std::int64_t width = static_cast<std::int64_t>(window_days) * kSecondsPerDay;
  std::vector<WindowSpec> out;
  for (std::int64_t s = start; s < end; s += width) {
    out.push_back({s, std::min(s + width, end), static_cast<int>(out.size())});
  }
  return out;
}

BalancedSampleResult balanced_sample(std::span<const Sample> samples, std::size_t num_categories,
                                     const SamplerConfig& cfg) {
  if (cfg.per_category_cap < 1) throw Error(ErrorCode::ConfigError, "per_category_cap must be >= 1");
  const auto windows = partition_windows(cfg.range_start, cfg.range_end, cfg.window_days);
  const std::int64_t range_begin = windows.front().start;
  const std::int64_t range_stop = windows.back().end;
  const std::int64_t width = static_cast<std::int64_t>(cfg.window_days) * kSecondsPerDay;

  // Group images by source tweet; std::map keeps tweets in id order so the
  // reservoirs see a canonical sequence regardless of input order.
  struct Tweet {
    std::vector<std::size_t> rows;
    int window = 0;
  };
  std::map<std::string, Tweet> tweets;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    check_labels(s, num_categories);
    if (s.timestamp < range_begin || s.timestamp >= range_stop) {
      throw Error(ErrorCode::OutOfRange, s.sample_id + ": timestamp " + std::to_string(s.timestamp) +
                                             " outside the sampling range");
    }
    auto& t = tweets[tweet_id_of(s.sample_id)];
    t.rows.push_back(i);
    t.window = static_cast<int>((s.timestamp - range_begin) / width);
  }

  struct Cell {
    Pcg32 rng;
    std::size_t seen = 0;
    std::vector<const std::string*> reservoir;
  };
  std::map<std::pair<int, int>, Cell> cells;
  for (const auto& [id, tweet] : tweets) {
    const auto& labels = samples[tweet.rows.front()].label_set;
    for (int c : labels) {
      auto key = std::make_pair(tweet.window, c);
      auto it = cells.find(key);
      if (it == cells.end()) {
        auto seed = mix_seed({cfg.seed, static_cast<std::uint64_t>(tweet.window), static_cast<std::uint64_t>(c)});
        it = cells.emplace(key, Cell{Pcg32(seed), 0, {}}).first;
      }
      auto& cell = it->second;
      if (cell.reservoir.size() < cfg.per_category_cap) {
        cell.reservoir.push_back(&id);
      } else {
        std::uint64_t j = cell.rng.bounded64(cell.seen + 1);
        if (j < cfg.per_category_cap) cell.reservoir[j] = &id;
      }
      ++cell.seen;
    }
  }

  BalancedSampleResult result;
  result.tweets_seen = tweets.size();
  std::set<std::string_view> kept;
  for (const auto& [key, cell] : cells) {
    result.cells[key] = {cell.seen, cell.reservoir.size()};
    for (const auto* id : cell.reservoir) kept.insert(*id);
  }
  result.tweets_kept = kept.size();
  for (auto id : kept) {
    const auto& tweet = tweets.find(std::string(id))->second;
    for (auto row : tweet.rows) {
      Sample s = samples[row];
      s.window_id = tweet.window;
      result.dataset.push_back(std::move(s));
    }
  }
  std::sort(result.dataset.begin(), result.dataset.end(),
            [](const Sample& a, const Sample& b) { return a.sample_id < b.sample_id; });
  return result;
}

LabelStats label_distribution(std::span<const Sample> dataset, std::size_t num_categories) {
  LabelStats stats;
  stats.counts.assign(num_categories, 0);
  stats.total_samples = dataset.size();
  for (const auto& s : dataset) {
    check_labels(s, num_categories);
    for (int c : s.label_set) ++stats.counts[c];
    stats.total_labels += s.label_set.size();
  }
  return stats;
}

Matrix cooccurrence_matrix(std::span<const Sample> dataset, std::size_t num_categories) {
  Matrix joint(num_categories, num_categories);
  for (const auto& s : dataset) {
    check_labels(s, num_categories);
    for (int i : s.label_set) {
      for (int j : s.label_set) joint(i, j) += 1.0;
    }
  }
  Matrix m(num_categories, num_categories);
  for (std::size_t i = 0; i < num_categories; ++i) {
    const double denom = joint(i, i);
    if (denom == 0.0) continue;
    for (std::size_t j = 0; j < num_categories; ++j) m(i, j) = joint(i, j) / denom;
  }
  return m;
}

DatasetSplit split_dataset(std::span<const Sample> dataset, std::size_t num_categories,
                           std::size_t val_per_class, std::size_t test_per_class, std::uint64_t seed) {
  if (dataset.empty()) throw Error(ErrorCode::InvalidArgument, "cannot split an empty dataset");
  std::vector<Sample> sorted(dataset.begin(), dataset.end());
  std::sort(sorted.begin(), sorted.end(), [](const Sample& a, const Sample& b) { return a.sample_id < b.sample_id; });

  const auto stats = label_distribution(sorted, num_categories);
  DatasetSplit split;
  std::vector<int> order;
  for (std::size_t c = 0; c < num_categories; ++c) {
    if (stats.counts[c] == 0) {
      split.empty_categories.push_back(static_cast<int>(c));
    } else {
      order.push_back(static_cast<int>(c));
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return stats.counts[a] < stats.counts[b]; });

  enum Slot : std::uint8_t { kTrain, kVal, kTest };
  std::vector<Slot> slot(sorted.size(), kTrain);
  std::vector<bool> drawn(sorted.size(), false);
  std::vector<std::size_t> val_count(num_categories, 0), test_count(num_categories, 0);

  for (int c : order) {
    if (val_count[c] >= val_per_class && test_count[c] >= test_per_class) continue;
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (!drawn[i] && has_label(sorted[i], c)) candidates.push_back(i);
    }
    Pcg32 rng(mix_seed({seed, static_cast<std::uint64_t>(c)}));
    rng.shuffle(std::span(candidates));
    for (auto i : candidates) {
      if (val_count[c] < val_per_class) {
        slot[i] = kVal;
        for (int l : sorted[i].label_set) ++val_count[l];
      } else if (test_count[c] < test_per_class) {
        slot[i] = kTest;
        for (int l : sorted[i].label_set) ++test_count[l];
      } else {
        break;
      }
      drawn[i] = true;
    }
  }

  for (std::size_t i = 0; i < sorted.size(); ++i) {
    switch (slot[i]) {
      case kTrain: split.train.push_back(std::move(sorted[i])); break;
      case kVal: split.val.push_back(std::move(sorted[i])); break;
      case kTest: split.test.push_back(std::move(sorted[i])); break;
    }
  }
  return split;
}

std::string label_stats_csv(const LabelStats& stats, const EmojiTaxonomy& tax) {
  std::string out = "category_id,name,count\n";
  for (std::size_t c = 0; c < stats.counts.size(); ++c) {
    out += std::to_string(c) + "," + csv_escape(tax[c].name) + "," + std::to_string(stats.counts[c]) + "\n";
  }
  return out;
}

std::string cooccurrence_csv(const Matrix& m, const EmojiTaxonomy& tax) {
  std::string out = "category";
  for (std::size_t j = 0; j < m.cols; ++j) out += "," + csv_escape(tax[j].name);
  out += "\n";
  for (std::size_t i = 0; i < m.rows; ++i) {
    out += csv_escape(tax[i].name);
    for (std::size_t j = 0; j < m.cols; ++j) out += "," + format_double(m(i, j));
    out += "\n";
  }
  return out;
}

}  // namespace smiley
