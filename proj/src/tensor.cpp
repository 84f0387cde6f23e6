#include "smiley/tensor.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <functional>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "smiley/binary_io.hpp"
#include "smiley/error.hpp"

namespace smiley {
namespace {

constexpr char kTensorMagic[4] = {'S', 'M', 'L', 'Y'};
constexpr std::uint16_t kTensorVersion = 1;
constexpr std::uint8_t kDtypeF32 = 0;

std::size_t element_count(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto d : shape) {
    if (d == 0) throw Error(ErrorCode::ShapeError, "zero-sized dimension in " + shape_string(shape));
    n *= d;
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
  data_.assign(element_count(shape_), 0.0f);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != element_count(shape_)) {
    throw Error(ErrorCode::ShapeError, std::to_string(data_.size()) + " values for shape " +
                                           shape_string(shape_));
  }
  check_finite("Tensor");
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::initializer_list<float> values) {
  return Tensor({rows, cols}, std::vector<float>(values));
}

Tensor Tensor::vector(std::initializer_list<float> values) {
  return Tensor({values.size()}, std::vector<float>(values));
}

void Tensor::check_finite(const char* context) const {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw Error(ErrorCode::NumericError,
                  std::string(context) + ": non-finite value at flat index " + std::to_string(i));
    }
  }
}

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw Error(ErrorCode::ShapeError,
                "matmul " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<float> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += double(a.at(i, p)) * double(b.at(p, j));
      out[i * n + j] = static_cast<float>(acc);
    }
  }
  return Tensor({m, n}, std::move(out));
}

void write_tensor(std::ostream& out, const Tensor& t) {
  out.write(kTensorMagic, 4);
  write_le<std::uint16_t>(out, kTensorVersion);
  write_le<std::uint8_t>(out, kDtypeF32);
  write_le<std::uint8_t>(out, static_cast<std::uint8_t>(t.rank()));
  for (auto d : t.shape()) write_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  for (float v : t.data()) write_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
}

Tensor read_tensor(std::istream& in) {
  char magic[4];
  read_exact(in, magic, 4, "tensor magic");
  if (std::memcmp(magic, kTensorMagic, 4) != 0) throw Error(ErrorCode::ParseError, "bad tensor magic");
  auto version = read_le<std::uint16_t>(in, "tensor version");
  if (version != kTensorVersion) {
    throw Error(ErrorCode::ParseError, "unsupported tensor version " + std::to_string(version));
  }
  if (read_le<std::uint8_t>(in, "tensor dtype") != kDtypeF32) {
    throw Error(ErrorCode::ParseError, "unsupported tensor dtype");
  }
  auto rank = read_le<std::uint8_t>(in, "tensor rank");
  if (rank == 0) throw Error(ErrorCode::ParseError, "rank-0 tensor");
  std::vector<std::size_t> shape(rank);
  std::size_t count = 1;
  for (auto& d : shape) {
    d = read_le<std::uint32_t>(in, "tensor dims");
    if (d == 0) throw Error(ErrorCode::ParseError, "zero tensor dimension");
    count *= d;
    if (count > (std::size_t{1} << 32)) throw Error(ErrorCode::ParseError, "tensor too large");
  }
  std::vector<float> data(count);
  for (auto& v : data) v = std::bit_cast<float>(read_le<std::uint32_t>(in, "tensor payload"));
  return Tensor(std::move(shape), std::move(data));
}

std::string encode_tensor(const Tensor& t) {
  std::ostringstream out(std::ios::binary);
  write_tensor(out, t);
  return out.str();
}

Tensor decode_tensor(std::string_view bytes) {
  std::istringstream in(std::string(bytes), std::ios::binary);
  return read_tensor(in);
}

}  // namespace smiley
