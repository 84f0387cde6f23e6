#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "smiley/tensor.hpp"

namespace smiley {

/// Row-major f64 matrix for the eigen/PCA paths, where f32 storage would
/// cap attainable accuracy.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  static Matrix from_tensor(const Tensor& t);
};

struct EigenDecomposition {
  std::vector<double> values;  // descending
  Matrix vectors;              // column i pairs with values[i]
  int sweeps = 0;
};

/// Cyclic Jacobi. Requires max |S - S^T| <= 1e-6; converges when the
/// off-diagonal Frobenius norm drops below 1e-12 * max(1, ||S||_F), at most
/// 100 sweeps (NumericError otherwise).
EigenDecomposition sym_eig(const Matrix& s);

struct PcaResult {
  Matrix components;  // k x d, unit rows, largest-|entry| positive
  std::vector<double> explained_variance;
  std::vector<double> mean;

  /// (x - mean) * components^T for each row of x.
  Matrix project(const Matrix& x) const;
};

/// Covariance with divisor n-1, eigendecomposed; n >= 2, 1 <= k <= min(n, d).
PcaResult pca(const Matrix& x, std::size_t k);
PcaResult pca(const Tensor& x, std::size_t k);

}  // namespace smiley
