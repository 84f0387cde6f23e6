#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numeric>

#include "smiley/error.hpp"
#include "smiley/linalg.hpp"
#include "smiley/optim.hpp"
#include "smiley/rng.hpp"
#include "smiley/tensor.hpp"

using namespace smiley;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Pcg32& rng) {
  Matrix m(r, c);
  for (auto& v : m.data) v = rng.normal();
  return m;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("tensor construction rejects bad input") {
  CHECK(code_of([] { Tensor({2, 2}, {1, 2, 3}); }) == ErrorCode::ShapeError);
  CHECK(code_of([] { Tensor::vector({1.0f, std::numeric_limits<float>::quiet_NaN()}); }) == ErrorCode::NumericError);
  CHECK(code_of([] { Tensor::vector({std::numeric_limits<float>::infinity()}); }) == ErrorCode::NumericError);
  Tensor z({2, 3});
  CHECK(z.size() == 6);
  CHECK(std::all_of(z.data().begin(), z.data().end(), [](float v) { return v == 0.0f; }));
}

TEST_CASE("matmul examples") {
  const auto a = Tensor::matrix(2, 2, {1, 2, 3, 4});
  const auto b = Tensor::matrix(2, 1, {1, 1});
  CHECK(matmul(a, b) == Tensor::matrix(2, 1, {3, 7}));

  const auto eye = Tensor::matrix(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  Pcg32 rng(4);
  Tensor r({3, 4});
  for (auto& v : r.data()) v = static_cast<float>(rng.normal());
  CHECK(matmul(eye, r) == r);

  CHECK(code_of([] { matmul(Tensor({2, 3}), Tensor({2, 3})); }) == ErrorCode::ShapeError);
}

TEST_CASE("tensor file format") {
  const auto t = Tensor::matrix(2, 3, {1.5f, -2, 0, 4, 5, 6.25f});
  const auto bytes = encode_tensor(t);
  REQUIRE(bytes.size() == 4 + 2 + 1 + 1 + 2 * 4 + 6 * 4);
  CHECK(bytes.substr(0, 4) == "SMLY");
  CHECK(static_cast<unsigned char>(bytes[4]) == 1);
  CHECK(static_cast<unsigned char>(bytes[5]) == 0);
  CHECK(static_cast<unsigned char>(bytes[6]) == 0);  // f32
  CHECK(static_cast<unsigned char>(bytes[7]) == 2);  // rank
  CHECK(static_cast<unsigned char>(bytes[8]) == 2);
  CHECK(static_cast<unsigned char>(bytes[12]) == 3);
  // 1.5f = 0x3FC00000 little-endian
  CHECK(static_cast<unsigned char>(bytes[16]) == 0x00);
  CHECK(static_cast<unsigned char>(bytes[18]) == 0xC0);
  CHECK(static_cast<unsigned char>(bytes[19]) == 0x3F);
  CHECK(decode_tensor(bytes) == t);

  CHECK(code_of([&] { decode_tensor(bytes.substr(0, bytes.size() - 1)); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { decode_tensor("XXXX" + bytes.substr(4)); }) == ErrorCode::ParseError);
  std::string nan_bytes = bytes;
  nan_bytes[16] = '\x00';
  nan_bytes[17] = '\x00';
  nan_bytes[18] = '\xC0';
  nan_bytes[19] = '\x7F';
  CHECK(code_of([&] { decode_tensor(nan_bytes); }) == ErrorCode::NumericError);
}

TEST_CASE("pcg32 streams") {
  // Reference output of the PCG32 demo generator (seed 42, stream 54).
  Pcg32 demo(42, 54);
  const std::uint32_t expected[] = {0xa15c02b7, 0x7b47f409, 0xba1d3330, 0x83d2f293, 0xbfa4784b, 0xcbed606e};
  for (auto e : expected) CHECK(demo.next_u32() == e);

  Pcg32 a(1, 2), b(1, 2), c(1, 3);
  bool differs = false;
  for (int i = 0; i < 16; ++i) {
    const auto x = a.next_u32();
    CHECK(x == b.next_u32());
    differs |= x != c.next_u32();
  }
  CHECK(differs);

  Pcg32 r(9);
  for (int i = 0; i < 10000; ++i) {
    CHECK(r.bounded(7) < 7);
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(mix_seed({1, 2}) == mix_seed({1, 2}));
  CHECK(mix_seed({1, 2}) != mix_seed({2, 1}));
}

TEST_CASE("adam examples") {
  SUBCASE("zero gradient from fresh state is a fixed point") {
    std::vector<Tensor> p{Tensor::vector({0.5f, -1.0f})};
    std::vector<Tensor> g{Tensor({2})};
    AdamState st(p, AdamConfig{});
    adam_step(p, g, st);
    CHECK(p[0] == Tensor::vector({0.5f, -1.0f}));
    CHECK(st.step == 1);
  }
  SUBCASE("single scalar step") {
    std::vector<Tensor> p{Tensor::vector({0.0f})};
    std::vector<Tensor> g{Tensor::vector({1.0f})};
    AdamConfig cfg;
    cfg.learning_rate = 0.1;
    AdamState st(p, cfg);
    adam_step(p, g, st);
    // m_hat = 1, v_hat = 1: p' = -0.1 / (1 + 1e-8)
    CHECK(p[0][0] == doctest::Approx(-0.0999999990).epsilon(1e-7));
    CHECK(st.m[0][0] == doctest::Approx(0.1));
    CHECK(st.v[0][0] == doctest::Approx(0.001));
  }
  SUBCASE("deterministic") {
    auto run = [] {
      std::vector<Tensor> p{Tensor::vector({0.3f, 0.7f})};
      std::vector<Tensor> g{Tensor::vector({0.2f, -0.9f})};
      AdamState st(p, AdamConfig{});
      for (int i = 0; i < 5; ++i) adam_step(p, g, st);
      return p[0];
    };
    CHECK(run() == run());
  }
  SUBCASE("step one is scale free") {
    Pcg32 rng(2);
    for (int trial = 0; trial < 50; ++trial) {
      const float g = static_cast<float>(rng.normal());
      std::vector<Tensor> p1{Tensor::vector({0.0f})}, p10{Tensor::vector({0.0f})};
      std::vector<Tensor> g1{Tensor::vector({g})}, g10{Tensor::vector({10.0f * g})};
      AdamState s1(p1, AdamConfig{}), s10(p10, AdamConfig{});
      adam_step(p1, g1, s1);
      adam_step(p10, g10, s10);
      CHECK(std::abs(p1[0][0] - p10[0][0]) <= 1e-6 * std::abs(p1[0][0]));
    }
  }
  SUBCASE("non-finite gradient is rejected before any update") {
    std::vector<Tensor> p{Tensor::vector({1.0f})};
    AdamState st(p, AdamConfig{});
    std::vector<float> bad{std::numeric_limits<float>::infinity()};
    // Build the tensor without validation by writing through data().
    Tensor g({1});
    g.data()[0] = bad[0];
    std::vector<Tensor> grads{g};
    CHECK(code_of([&] { adam_step(p, grads, st); }) == ErrorCode::NumericError);
    CHECK(p[0][0] == 1.0f);
    CHECK(st.step == 0);
  }
  SUBCASE("second moments stay non-negative") {
    std::vector<Tensor> p{Tensor({4})};
    AdamState st(p, AdamConfig{});
    Pcg32 rng(5);
    for (int i = 0; i < 20; ++i) {
      Tensor g({4});
      for (auto& v : g.data()) v = static_cast<float>(rng.normal());
      std::vector<Tensor> grads{g};
      adam_step(p, grads, st);
      for (float v : st.v[0].data()) CHECK(v >= 0.0f);
    }
  }
}

TEST_CASE("sym_eig examples") {
  Matrix d(2, 2);
  d(0, 0) = 3;
  d(1, 1) = 1;
  auto e = sym_eig(d);
  CHECK(e.values[0] == doctest::Approx(3));
  CHECK(e.values[1] == doctest::Approx(1));
  CHECK(std::abs(e.vectors(0, 0)) == doctest::Approx(1));
  CHECK(std::abs(e.vectors(1, 1)) == doctest::Approx(1));

  Matrix s(2, 2);
  s(0, 0) = 2;
  s(0, 1) = 1;
  s(1, 0) = 1;
  s(1, 1) = 2;
  e = sym_eig(s);
  CHECK(e.values[0] == doctest::Approx(3).epsilon(1e-12));
  CHECK(e.values[1] == doctest::Approx(1).epsilon(1e-12));

  Matrix asym = s;
  asym(0, 1) = 1.5;
  CHECK(code_of([&] { sym_eig(asym); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("sym_eig residuals and orthonormality") {
  Pcg32 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.bounded(10);
    const auto a = random_matrix(n, n, rng);
    Matrix s(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) s(i, j) = a(i, j) + a(j, i);
    const auto e = sym_eig(s);
    double norm = 0;
    for (double v : s.data) norm += v * v;
    norm = std::sqrt(norm);
    for (std::size_t k = 0; k < n; ++k) {
      if (k > 0) CHECK(e.values[k - 1] >= e.values[k]);
      for (std::size_t i = 0; i < n; ++i) {
        double sv = 0;
        for (std::size_t j = 0; j < n; ++j) sv += s(i, j) * e.vectors(j, k);
        CHECK(std::abs(sv - e.values[k] * e.vectors(i, k)) <= 1e-6 * norm);
      }
      for (std::size_t l = 0; l < n; ++l) {
        double dot = 0;
        for (std::size_t i = 0; i < n; ++i) dot += e.vectors(i, k) * e.vectors(i, l);
        CHECK(std::abs(dot - (k == l ? 1.0 : 0.0)) <= 1e-8);
      }
    }
  }
}

TEST_CASE("pca examples") {
  SUBCASE("points on y = x") {
    Matrix x(5, 2);
    for (std::size_t i = 0; i < 5; ++i) x(i, 0) = x(i, 1) = static_cast<double>(i);
    const auto p = pca(x, 2);
    CHECK(p.components(0, 0) == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK(p.components(0, 1) == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK(p.explained_variance[1] == doctest::Approx(0.0));
  }
  SUBCASE("full rank reconstruction") {
    Pcg32 rng(3);
    const auto x = random_matrix(5, 3, rng);
    const auto p = pca(x, 3);
    const auto proj = p.project(x);
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        double r = p.mean[j];
        for (std::size_t k = 0; k < 3; ++k) r += proj(i, k) * p.components(k, j);
        CHECK(std::abs(r - x(i, j)) <= 1e-5);
      }
    }
  }
  SUBCASE("constant data has zero variance") {
    Matrix x(4, 3);
    for (auto& v : x.data) v = 2.5;
    const auto p = pca(x, 2);
    for (double v : p.explained_variance) CHECK(v == 0.0);
  }
  SUBCASE("precondition errors") {
    CHECK(code_of([] { pca(Matrix(1, 3), 1); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { pca(Matrix(4, 3), 4); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { pca(Matrix(4, 3), 0); }) == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("pca matches a dense eigensolver oracle") {
  Pcg32 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_matrix(20, 4, rng);
    const auto p = pca(x, 4);

    Eigen::MatrixXd ex(20, 4);
    for (std::size_t i = 0; i < 20; ++i)
      for (std::size_t j = 0; j < 4; ++j) ex(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x(i, j);
    const Eigen::RowVectorXd mean = ex.colwise().mean();
    const Eigen::MatrixXd centered = ex.rowwise() - mean;
    const Eigen::MatrixXd cov = centered.transpose() * centered / 19.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    for (int k = 0; k < 4; ++k) {
      const int col = 3 - k;  // Eigen sorts ascending
      Eigen::VectorXd v = solver.eigenvectors().col(col);
      Eigen::Index arg;
      v.cwiseAbs().maxCoeff(&arg);
      if (v(arg) < 0) v = -v;
      CHECK(std::abs(p.explained_variance[k] - solver.eigenvalues()(col)) <= 1e-8);
      for (int j = 0; j < 4; ++j) CHECK(std::abs(p.components(k, j) - v(j)) <= 1e-8);
    }
    double total = 0;
    for (int j = 0; j < 4; ++j) total += cov(j, j);
    const double sum = std::accumulate(p.explained_variance.begin(), p.explained_variance.end(), 0.0);
    CHECK(std::abs(sum - total) <= 1e-6 * total);
    for (int k = 1; k < 4; ++k) CHECK(p.explained_variance[k - 1] >= p.explained_variance[k]);
  }
}

TEST_CASE("pca is bit reproducible") {
  Pcg32 rng(8);
  const auto x = random_matrix(15, 5, rng);
  const auto a = pca(x, 3), b = pca(x, 3);
  CHECK(a.components.data == b.components.data);
  CHECK(a.explained_variance == b.explained_variance);
}
