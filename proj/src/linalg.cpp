#include "smiley/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "smiley/error.hpp"

namespace smiley {
namespace {

constexpr double kSymmetryTolerance = 1e-6;
constexpr double kOffDiagonalTolerance = 1e-12;
constexpr int kMaxSweeps = 100;

double off_diagonal_norm(const Matrix& a) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < a.cols; ++j) {
      if (i != j) acc += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(acc);
}

}  // namespace

Matrix Matrix::from_tensor(const Tensor& t) {
  if (t.rank() != 2) throw Error(ErrorCode::ShapeError, "expected a matrix, got " + shape_string(t.shape()));
  Matrix m(t.dim(0), t.dim(1));
  for (std::size_t i = 0; i < t.size(); ++i) m.data[i] = t[i];
  return m;
}

EigenDecomposition sym_eig(const Matrix& s) {
  if (s.rows != s.cols || s.rows == 0) throw Error(ErrorCode::ShapeError, "sym_eig needs a square matrix");
  const std::size_t n = s.rows;
  double frob = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(s(i, j))) throw Error(ErrorCode::NumericError, "sym_eig: non-finite input");
      if (std::abs(s(i, j) - s(j, i)) > kSymmetryTolerance) {
        throw Error(ErrorCode::InvalidArgument, "sym_eig: matrix is not symmetric");
      }
      frob += s(i, j) * s(i, j);
    }
  }
  frob = std::sqrt(frob);
  const double tol = kOffDiagonalTolerance * std::max(1.0, frob);

  Matrix a = s;
  // Symmetrize exactly so the rotations act on a truly symmetric matrix.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (a(i, j) + a(j, i));
  }
  Matrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  int sweep = 0;
  while (off_diagonal_norm(a) >= tol) {
    if (sweep == kMaxSweeps) {
      throw Error(ErrorCode::NumericError, "sym_eig: no convergence after 100 sweeps");
    }
    ++sweep;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (apq == 0.0) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  EigenDecomposition out;
  out.sweeps = sweep;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    out.values[i] = a(order[i], order[i]);
    for (std::size_t k = 0; k < n; ++k) out.vectors(k, i) = v(k, order[i]);
  }
  return out;
}

Matrix PcaResult::project(const Matrix& x) const {
  const std::size_t k = components.rows, d = components.cols;
  if (x.cols != d) throw Error(ErrorCode::ShapeError, "project: dimension mismatch");
  Matrix out(x.rows, k);
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) acc += (x(i, j) - mean[j]) * components(c, j);
      out(i, c) = acc;
    }
  }
  return out;
}

PcaResult pca(const Matrix& x, std::size_t k) {
  const std::size_t n = x.rows, d = x.cols;
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "pca needs at least 2 rows");
  if (k < 1 || k > std::min(n, d)) throw Error(ErrorCode::InvalidArgument, "pca: k out of range");

  PcaResult r;
  r.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) r.mean[j] += x(i, j);
  }
  for (auto& m : r.mean) m /= static_cast<double>(n);

  Matrix cov(d, d);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += (x(i, a) - r.mean[a]) * (x(i, b) - r.mean[b]);
      cov(a, b) = cov(b, a) = acc / static_cast<double>(n - 1);
    }
  }

  auto eig = sym_eig(cov);
  r.components = Matrix(k, d);
  r.explained_variance.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    // Rounding can leave tiny negative eigenvalues for rank-deficient data.
    r.explained_variance[c] = std::max(0.0, eig.values[c]);
    std::size_t arg = 0;
    for (std::size_t j = 1; j < d; ++j) {
      if (std::abs(eig.vectors(j, c)) > std::abs(eig.vectors(arg, c))) arg = j;
    }
    double sign = eig.vectors(arg, c) < 0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < d; ++j) r.components(c, j) = sign * eig.vectors(j, c);
  }
  return r;
}

PcaResult pca(const Tensor& x, std::size_t k) { return pca(Matrix::from_tensor(x), k); }

}  // namespace smiley
