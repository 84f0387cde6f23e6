#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "smiley/analysis.hpp"
#include "smiley/metrics.hpp"
#include "test_util.hpp"

using namespace smiley;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

using Vec = std::vector<double>;

}  // namespace

TEST_CASE("spearman examples") {
  CHECK(*spearman(Vec{1, 2, 3}, Vec{10, 20, 30}) == doctest::Approx(1.0));
  CHECK(*spearman(Vec{1, 2, 3}, Vec{3, 2, 1}) == doctest::Approx(-1.0));
  const Vec x{1, 1, 2}, y{0, 1, 1};
  CHECK(std::abs(*spearman(x, y) - oracle::spearman(x, y)) <= 1e-12);
  CHECK(*spearman(x, y) == doctest::Approx(0.5));

  CHECK_FALSE(spearman(Vec{4, 4, 4}, Vec{1, 2, 3}).has_value());
  CHECK_FALSE(spearman(Vec{1, 2, 3}, Vec{0, 0, 0}).has_value());
  CHECK(code_of([] { spearman(Vec{1, 2}, Vec{1, 2}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { spearman(Vec{1, 2, 3}, Vec{1, 2}); }) == ErrorCode::InvalidArgument);

  CHECK(average_ranks(Vec{10, 30, 20, 20}) == Vec{1, 4, 2.5, 2.5});
}

TEST_CASE("spearman matches the average-rank oracle") {
  Pcg32 rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 3 + rng.bounded(60);
    Vec x(n), y(n);
    const bool ties = trial % 2 == 0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = ties ? rng.bounded(4) : rng.normal();
      y[i] = ties ? rng.bounded(3) : rng.normal();
    }
    x[0] = 0;
    x[1] = 5;
    y[0] = 0;
    y[1] = 5;
    const auto s = spearman(x, y);
    REQUIRE(s.has_value());
    CHECK(std::abs(*s - oracle::spearman(x, y)) <= 1e-12);
  }
}

TEST_CASE("spearman properties") {
  Pcg32 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng.bounded(40);
    Vec x(n), y(n), gx(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.bounded(6);
      y[i] = rng.normal();
      gx[i] = std::exp(x[i]) - 3;
    }
    x[0] = 0;
    x[1] = 1;
    gx[0] = std::exp(0.0) - 3;
    gx[1] = std::exp(1.0) - 3;
    const auto a = spearman(x, y);
    REQUIRE(a.has_value());
    CHECK(*a == *spearman(gx, y));
    CHECK(std::abs(*a - *spearman(y, x)) <= 1e-12);
    CHECK(*a >= -1.0 - 1e-12);
    CHECK(*a <= 1.0 + 1e-12);
  }
}

TEST_CASE("correlate_dimensions") {
  const std::vector<std::uint8_t> labels{0, 1, 0, 1, 1, 0};
  Tensor probs({6, 3});
  for (std::size_t i = 0; i < 6; ++i) {
    probs.at(i, 0) = labels[i];
    probs.at(i, 1) = 1.0f - labels[i];
    probs.at(i, 2) = 0.4f;
  }
  const auto r = correlate_dimensions(probs, labels);
  CHECK(*r[0] == doctest::Approx(1.0));
  CHECK(*r[1] == doctest::Approx(-1.0));
  CHECK_FALSE(r[2].has_value());

  Pcg32 rng(43);
  std::vector<std::uint8_t> coin(200);
  Tensor noise({200, 1});
  for (std::size_t i = 0; i < 200; ++i) {
    coin[i] = rng.bounded(2);
    noise.at(i, 0) = static_cast<float>(rng.uniform());
  }
  CHECK(std::abs(*correlate_dimensions(noise, coin)[0]) < 0.2);

  const std::vector<std::uint8_t> all_pos(6, 1);
  CHECK(code_of([&] { correlate_dimensions(probs, all_pos); }) == ErrorCode::DegenerateClass);
}

TEST_CASE("fingerprint recovers a planted signal") {
  int recovered = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto w = oracle::planted_fingerprint(10, 6, 30, 0.1, seed);
    const auto f = fingerprint(w.probs, w.emotion, w.names);
    bool all = true;
    for (std::size_t c = 0; c < 10; ++c) {
      for (std::size_t e = 0; e < 6; ++e) {
        REQUIRE(f.at(c, e).has_value());
        CHECK(std::abs(*f.at(c, e)) <= 1.0 + 1e-12);
      }
      all &= f.argmax_emotion(c) == static_cast<std::size_t>(w.planted[c]);
    }
    recovered += all;
  }
  CHECK(recovered >= 19);
}

TEST_CASE("fingerprint edge cases") {
  auto w = oracle::planted_fingerprint(3, 3, 5, 0.1, 1);
  for (std::size_t i = 0; i < w.probs.dim(0); ++i) w.probs.at(i, 1) = 0.25f;
  const auto f = fingerprint(w.probs, w.emotion, w.names);
  for (std::size_t e = 0; e < 3; ++e) CHECK_FALSE(f.at(1, e).has_value());
  CHECK_FALSE(f.argmax_emotion(1).has_value());
  CHECK(f.column(0).size() == 3);

  // Only two samples of the last emotion.
  std::vector<int> sparse(w.emotion.size(), 0);
  sparse[0] = 2;
  sparse[1] = 2;
  for (std::size_t i = 2; i < sparse.size(); ++i) sparse[i] = static_cast<int>(i % 2);
  CHECK(code_of([&] { fingerprint(w.probs, sparse, w.names); }) == ErrorCode::DegenerateClass);

  const auto tax = testutil::fixture_taxonomy();
  const auto fw = oracle::planted_fingerprint(8, 2, 5, 0.1, 2);
  const auto csv = fingerprint_csv(fingerprint(fw.probs, fw.emotion, fw.names), tax);
  CHECK(csv.substr(0, csv.find('\n')) == "category,emotion0,emotion1");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);
}

TEST_CASE("rank_top") {
  CHECK(rank_top(Vec{0.1, 0.9, 0.5}, 1) == std::vector<RankedEntry>{{1, 0.9}});
  CHECK(rank_top(Vec{0.3, 0.3, 0.3, 0.3}, 3) == std::vector<RankedEntry>{{0, 0.3}, {1, 0.3}, {2, 0.3}});
  const std::vector<std::optional<double>> partial{std::nullopt, 0.2, std::nullopt};
  CHECK(rank_top(partial, 7) == std::vector<RankedEntry>{{1, 0.2}});

  Pcg32 rng(44);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.bounded(30);
    Vec v(n);
    for (auto& x : v) x = static_cast<double>(rng.bounded(8)) / 7.0;
    std::vector<RankedEntry> all;
    for (std::size_t i = 0; i < n; ++i) all.push_back({static_cast<int>(i), v[i]});
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.value > b.value; });
    const std::size_t k = 1 + rng.bounded(10);
    all.resize(std::min(k, n));
    const auto got = rank_top(v, k);
    CHECK(got == all);
    for (std::size_t i = 1; i < got.size(); ++i) CHECK(got[i - 1].value >= got[i].value);
  }
}

TEST_CASE("project_2d") {
  SUBCASE("separated clusters stay separable") {
    Pcg32 rng(45);
    Tensor emb({200, 10});
    std::vector<int> labels(200);
    for (std::size_t i = 0; i < 200; ++i) {
      labels[i] = static_cast<int>(i % 2);
      for (std::size_t j = 0; j < 10; ++j) {
        emb.at(i, j) = static_cast<float>(0.5 + (labels[i] ? 0.3 : -0.3) * (j < 5 ? 1 : -1) + 0.05 * rng.normal());
      }
    }
    const auto p = project_2d(emb, labels);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < 200; ++i) {
      // Leave-one-out 1-NN on the projected coordinates.
      double best = INFINITY;
      int pred = -1;
      for (std::size_t j = 0; j < 200; ++j) {
        if (j == i) continue;
        const double dx = p.coords(i, 0) - p.coords(j, 0), dy = p.coords(i, 1) - p.coords(j, 1);
        if (dx * dx + dy * dy < best) {
          best = dx * dx + dy * dy;
          pred = labels[j];
        }
      }
      correct += pred == labels[i];
    }
    CHECK(correct >= 190);
  }
  SUBCASE("collinear points have rank one") {
    const auto p = project_2d(Tensor::matrix(3, 2, {0, 0, 1, 2, 2, 4}), std::vector<int>{0, 1, 2});
    CHECK(p.pca.explained_variance[1] == doctest::Approx(0.0));
    CHECK(p.pca.explained_variance[0] > 0.0);
  }
  SUBCASE("identical points project to the origin") {
    const auto p = project_2d(Tensor::matrix(4, 3, {1, 2, 3, 1, 2, 3, 1, 2, 3, 1, 2, 3}), std::vector<int>{0, 0, 1, 1});
    for (double v : p.coords.data) CHECK(v == 0.0);
    const std::vector<std::string> ids{"a", "b", "c", "d"}, names{"x", "y"};
    CHECK(projection_csv(p, ids) == "sid,x,y,label\na,0,0,0\nb,0,0,0\nc,0,0,1\nd,0,0,1\n");
    const auto svg = projection_svg(p, names);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("viewBox=\"0 0 800 800\"") != std::string::npos);
  }
  SUBCASE("too few points") {
    CHECK(code_of([] { project_2d(Tensor::matrix(2, 2, {0, 1, 2, 3}), std::vector<int>{0, 1}); }) ==
          ErrorCode::InvalidArgument);
  }
}
