#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace smiley {

/// Dense row-major f32 array. Every public constructor and operation rejects
/// non-finite values with Error(NumericError).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);  // zero-filled
  Tensor(std::vector<std::size_t> shape, std::vector<float> data);

  static Tensor matrix(std::size_t rows, std::size_t cols, std::initializer_list<float> values);
  static Tensor vector(std::initializer_list<float> values);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }
  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  /// Rank-2 element access.
  float& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  float at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

  std::span<float> row(std::size_t r) { return std::span(data_).subspan(r * shape_[1], shape_[1]); }
  std::span<const float> row(std::size_t r) const {
    return std::span(data_).subspan(r * shape_[1], shape_[1]);
  }

  /// Throws NumericError if any element is NaN or infinite.
  void check_finite(const char* context) const;

  bool operator==(const Tensor&) const = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<float> data_;
};

std::string shape_string(const std::vector<std::size_t>& shape);

/// Sequential-k product with f64 accumulation.
Tensor matmul(const Tensor& a, const Tensor& b);

/// SMLY tensor file encoding: magic, u16 version, u8 dtype, u8 rank,
/// u32 LE dims, LE f32 payload.
void write_tensor(std::ostream& out, const Tensor& t);
Tensor read_tensor(std::istream& in);
std::string encode_tensor(const Tensor& t);
Tensor decode_tensor(std::string_view bytes);

}  // namespace smiley
