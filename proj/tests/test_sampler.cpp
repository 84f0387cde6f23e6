#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "smiley/error.hpp"
#include "smiley/rng.hpp"
#include "smiley/sampler.hpp"
#include "smiley/text.hpp"
#include "test_util.hpp"

using namespace smiley;

namespace {

// Days since 1970-01-01 for a proleptic Gregorian date, computed by
// counting whole years and months.
long long days_since_epoch(int y, int m, int d) {
  auto leap = [](int yr) { return (yr % 4 == 0 && yr % 100 != 0) || yr % 400 == 0; };
  static const int month_days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  long long days = 0;
  for (int yr = 1970; yr < y; ++yr) days += leap(yr) ? 366 : 365;
  for (int mo = 1; mo < m; ++mo) days += month_days[mo - 1] + (mo == 2 && leap(y) ? 1 : 0);
  return days + d - 1;
}

constexpr std::int64_t kDay = 86400;

SamplerConfig config(const char* start, const char* end, std::size_t cap, std::uint64_t seed = 1) {
  SamplerConfig c;
  c.range_start = parse_date(start);
  c.range_end = parse_date(end);
  c.per_category_cap = cap;
  c.seed = seed;
  return c;
}

Sample make_sample(const std::string& tweet, std::int64_t ts, std::vector<int> labels, int ordinal = 0) {
  return Sample{tweet + "#" + std::to_string(ordinal), tweet + ".ppm", std::move(labels), ts, std::nullopt};
}

std::string padded(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "t%05d", i);
  return buf;
}

}  // namespace

TEST_CASE("date parsing") {
  CHECK(epoch_seconds(parse_date("1970-01-01")) == 0);
  CHECK(epoch_seconds(parse_date("2018-01-01")) == 1514764800);
  CHECK(format_date(parse_date("2016-02-29")) == "2016-02-29");
  for (const char* bad : {"2017-02-29", "2016-13-01", "2016-1-1x", "yesterday", ""}) {
    CHECK_THROWS_AS(parse_date(bad), Error);
  }
}

TEST_CASE("partition_windows examples") {
  const auto w = partition_windows(parse_date("2016-01-01"), parse_date("2018-07-31"), 30);
  const long long total_days = days_since_epoch(2018, 7, 31) - days_since_epoch(2016, 1, 1) + 1;
  CHECK(total_days == 943);
  REQUIRE(w.size() == 32);
  CHECK(static_cast<long long>(w.size()) == (total_days + 29) / 30);
  CHECK(w.front().start == days_since_epoch(2016, 1, 1) * kDay);
  CHECK(w.back().end == (days_since_epoch(2018, 7, 31) + 1) * kDay);
  CHECK(w.back().end - w.back().start == 13 * kDay);
  for (std::size_t i = 0; i < w.size(); ++i) {
    CHECK(w[i].index == static_cast<int>(i));
    CHECK(w[i].start < w[i].end);
    if (i > 0) CHECK(w[i].start == w[i - 1].end);
  }

  CHECK(partition_windows(parse_date("2016-01-01"), parse_date("2016-01-30"), 30).size() == 1);
  const auto two = partition_windows(parse_date("2016-01-01"), parse_date("2016-01-31"), 30);
  REQUIRE(two.size() == 2);
  CHECK(two[1].end - two[1].start == kDay);

  try {
    partition_windows(parse_date("2016-02-01"), parse_date("2016-01-01"), 30);
    FAIL("expected InvalidRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidRange);
  }
}

TEST_CASE("balanced_sample respects the cap") {
  const auto cfg = config("2016-01-01", "2016-01-30", 4000);
  const std::int64_t t0 = epoch_seconds(cfg.range_start);
  std::vector<Sample> samples;
  for (int i = 0; i < 4001; ++i) samples.push_back(make_sample(padded(i), t0 + i, {0}));
  const auto r = balanced_sample(samples, 1, cfg);
  CHECK(r.dataset.size() == 4000);
  CHECK(r.cells.at({0, 0}).seen == 4001);
  CHECK(r.cells.at({0, 0}).selected == 4000);

  samples.resize(10);
  const auto small = balanced_sample(samples, 1, cfg);
  CHECK(small.dataset.size() == 10);
  for (const auto& s : small.dataset) CHECK(s.window_id == 0);
}

TEST_CASE("multi-label tweets are kept once with all labels and images") {
  const auto cfg = config("2016-01-01", "2016-01-30", 3, 42);
  const std::int64_t t0 = epoch_seconds(cfg.range_start);
  std::vector<Sample> samples{make_sample("a", t0, {0, 1}), make_sample("a", t0, {0, 1}, 1),
                              make_sample("b", t0 + 1, {0}), make_sample("c", t0 + 2, {1}),
                              make_sample("d", t0 + 3, {1, 2}), make_sample("e", t0 + 4, {2})};
  const auto r = balanced_sample(samples, 3, cfg);
  // Every cell has at most 3 tweets, so everything is selected.
  CHECK(r.dataset.size() == samples.size());
  std::map<std::string, int> per_sid;
  for (const auto& s : r.dataset) ++per_sid[s.sample_id];
  for (const auto& [sid, n] : per_sid) CHECK(n == 1);
  auto it = std::find_if(r.dataset.begin(), r.dataset.end(), [](const Sample& s) { return s.sample_id == "a#1"; });
  REQUIRE(it != r.dataset.end());
  CHECK(it->label_set == std::vector<int>{0, 1});
  CHECK(std::is_sorted(r.dataset.begin(), r.dataset.end(),
                       [](const Sample& x, const Sample& y) { return x.sample_id < y.sample_id; }));
}

TEST_CASE("retained dataset equals the union of per-cell selections") {
  const auto cfg = config("2016-01-01", "2016-03-30", 4, 9);
  const std::int64_t t0 = epoch_seconds(cfg.range_start);
  Pcg32 rng(17);
  std::vector<Sample> samples;
  for (int i = 0; i < 300; ++i) {
    std::set<int> labels{static_cast<int>(rng.bounded(5))};
    if (rng.uniform() < 0.4) labels.insert(static_cast<int>(rng.bounded(5)));
    samples.push_back(make_sample(padded(i), t0 + static_cast<std::int64_t>(rng.bounded(89 * 86400)),
                                  {labels.begin(), labels.end()}));
  }
  const auto r = balanced_sample(samples, 5, cfg);
  std::size_t selections = 0;
  for (const auto& [cell, stats] : r.cells) {
    CHECK(stats.selected <= cfg.per_category_cap);
    CHECK(stats.selected == std::min(stats.seen, cfg.per_category_cap));
    selections += stats.selected;
  }
  CHECK(r.tweets_kept == r.dataset.size());
  CHECK(r.tweets_kept <= selections);
  CHECK(r.tweets_seen == samples.size());
}

TEST_CASE("balanced_sample is deterministic and seed dependent") {
  const std::int64_t t0 = epoch_seconds(parse_date("2016-01-01"));
  std::vector<Sample> samples;
  for (int i = 0; i < 200; ++i) samples.push_back(make_sample(padded(i), t0 + i * 1000, {i % 3}));
  auto bytes = [&](std::uint64_t seed) {
    testutil::TempDir dir("det");
    write_samples(dir / "d.jsonl", balanced_sample(samples, 3, config("2016-01-01", "2016-01-30", 20, seed)).dataset);
    return read_file(dir / "d.jsonl");
  };
  CHECK(bytes(5) == bytes(5));
  CHECK(bytes(5) != bytes(6));

  // Input order does not matter.
  auto shuffled = samples;
  Pcg32 rng(1);
  rng.shuffle(std::span(shuffled));
  const auto cfg = config("2016-01-01", "2016-01-30", 20, 5);
  CHECK(balanced_sample(shuffled, 3, cfg).dataset == balanced_sample(samples, 3, cfg).dataset);
}

TEST_CASE("reservoir selection is uniform") {
  const std::int64_t t0 = epoch_seconds(parse_date("2016-01-01"));
  std::vector<Sample> samples;
  for (int i = 0; i < 10; ++i) samples.push_back(make_sample(padded(i), t0 + i, {0}));
  std::map<std::string, int> hits;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    for (const auto& s : balanced_sample(samples, 1, config("2016-01-01", "2016-01-30", 5, seed)).dataset) {
      ++hits[s.sample_id];
    }
  }
  REQUIRE(hits.size() == 10);
  for (const auto& [sid, n] : hits) {
    CHECK(n >= 400);
    CHECK(n <= 600);
  }
}

TEST_CASE("sampling reduces imbalance") {
  const auto cfg = config("2016-01-01", "2016-12-31", 10, 3);
  const std::int64_t t0 = epoch_seconds(cfg.range_start);
  Pcg32 rng(8);
  std::vector<Sample> samples;
  // Category c has weight 100^(-c/4): a 100:1 spread over five categories.
  std::vector<double> cdf;
  double acc = 0;
  for (int c = 0; c < 5; ++c) cdf.push_back(acc += std::pow(100.0, -c / 4.0));
  for (int i = 0; i < 20000; ++i) {
    const int c = static_cast<int>(std::upper_bound(cdf.begin(), cdf.end(), rng.uniform() * acc) - cdf.begin());
    samples.push_back(make_sample(padded(i), t0 + static_cast<std::int64_t>(rng.bounded(366 * 86400)), {c}));
  }
  auto ratio = [](const LabelStats& s) {
    auto [lo, hi] = std::minmax_element(s.counts.begin(), s.counts.end());
    return static_cast<double>(*hi) / static_cast<double>(*lo);
  };
  const double before = ratio(label_distribution(samples, 5));
  const double after = ratio(label_distribution(balanced_sample(samples, 5, cfg).dataset, 5));
  CHECK(before > 50.0);
  CHECK(after < before);
}

TEST_CASE("out-of-range timestamps are rejected") {
  const auto cfg = config("2016-01-01", "2016-01-30", 5);
  const std::int64_t end = epoch_seconds(cfg.range_end) + kDay;
  for (std::int64_t ts : {epoch_seconds(cfg.range_start) - 1, end}) {
    std::vector<Sample> samples{make_sample("x", ts, {0})};
    try {
      balanced_sample(samples, 1, cfg);
      FAIL("expected OutOfRange");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::OutOfRange);
    }
  }
  std::vector<Sample> last{make_sample("x", end - 1, {0})};
  CHECK(balanced_sample(last, 1, cfg).dataset.size() == 1);
}

TEST_CASE("label_distribution") {
  CHECK(label_distribution({}, 3).counts == std::vector<std::size_t>{0, 0, 0});
  std::vector<Sample> ds{make_sample("a", 0, {0}), make_sample("b", 0, {0, 1}), make_sample("c", 0, {1})};
  const auto s = label_distribution(ds, 2);
  CHECK(s.counts == std::vector<std::size_t>{2, 2});
  CHECK(s.total_labels == 4);
  CHECK(s.total_samples == 3);
  std::vector<Sample> single{make_sample("a", 0, {0}), make_sample("b", 0, {1})};
  const auto t = label_distribution(single, 2);
  CHECK(t.total_labels == t.total_samples);
}

TEST_CASE("cooccurrence_matrix") {
  std::vector<Sample> ds{make_sample("a", 0, {0, 1}), make_sample("b", 0, {0})};
  const auto m = cooccurrence_matrix(ds, 3);
  CHECK(m(0, 1) == doctest::Approx(0.5));
  CHECK(m(1, 0) == doctest::Approx(1.0));
  CHECK(m(0, 0) == 1.0);
  CHECK(m(1, 1) == 1.0);
  for (std::size_t j = 0; j < 3; ++j) CHECK(m(2, j) == 0.0);

  std::vector<Sample> disjoint{make_sample("a", 0, {0}), make_sample("b", 0, {1})};
  const auto d = cooccurrence_matrix(disjoint, 2);
  CHECK(d(0, 1) == 0.0);
  CHECK(d(1, 0) == 0.0);

  const auto tax = testutil::fixture_taxonomy();
  const auto csv = cooccurrence_csv(cooccurrence_matrix(ds, tax.size()), tax);
  CHECK(csv.rfind("category,white_smiling_face,grinning_face", 0) == 0);
}

TEST_CASE("split_dataset") {
  std::vector<Sample> ds;
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 3000; ++i) ds.push_back(make_sample("c" + std::to_string(c) + "_" + padded(i), 0, {c}));
  }
  const auto s = split_dataset(ds, 3, 500, 1000, 4);
  auto count = [](const std::vector<Sample>& part, int c) {
    return std::count_if(part.begin(), part.end(),
                         [&](const Sample& x) { return std::find(x.label_set.begin(), x.label_set.end(), c) != x.label_set.end(); });
  };
  for (int c = 0; c < 3; ++c) {
    CHECK(count(s.val, c) == 500);
    CHECK(count(s.test, c) == 1000);
    CHECK(count(s.train, c) == 1500);
  }

  const auto none = split_dataset(ds, 3, 0, 0, 4);
  CHECK(none.train.size() == ds.size());
  CHECK(none.val.empty());
  CHECK(none.test.empty());

  const auto again = split_dataset(ds, 3, 500, 1000, 4);
  CHECK(again.val == s.val);
  CHECK(again.test == s.test);
}

TEST_CASE("split parts are disjoint and cover the dataset") {
  Pcg32 rng(21);
  std::vector<Sample> ds;
  for (int i = 0; i < 400; ++i) {
    std::set<int> labels{static_cast<int>(rng.bounded(6))};
    if (rng.uniform() < 0.5) labels.insert(static_cast<int>(rng.bounded(6)));
    ds.push_back(make_sample(padded(i), 0, {labels.begin(), labels.end()}));
  }
  const auto s = split_dataset(ds, 7, 10, 20, 2);
  std::set<std::string> ids;
  for (const auto* part : {&s.train, &s.val, &s.test}) {
    for (const auto& x : *part) CHECK(ids.insert(x.sample_id).second);
  }
  CHECK(ids.size() == ds.size());
  CHECK(s.empty_categories == std::vector<int>{6});
  CHECK_THROWS_AS(split_dataset({}, 3, 1, 1, 0), Error);
}

TEST_CASE("label stats csv") {
  const auto tax = testutil::fixture_taxonomy();
  std::vector<Sample> ds{make_sample("a", 0, {0, 2})};
  const auto csv = label_stats_csv(label_distribution(ds, tax.size()), tax);
  CHECK(csv.rfind("category_id,name,count\n0,white_smiling_face,1\n1,grinning_face,0\n2,face_with_tears_of_joy,1\n", 0) == 0);
}
