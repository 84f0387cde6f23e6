#include <algorithm>
#include <cctype>
#include <cmath>

#include "smiley/model.hpp"
#include "smiley/text.hpp"

namespace smiley {
namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string_view next_token(std::string_view bytes, std::size_t& pos) {
  for (;;) {
    while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  return bytes.substr(start, pos - start);
}

}  // namespace

Tensor decode_ppm(std::string_view bytes) {
  std::size_t pos = 0;
  if (next_token(bytes, pos) != "P6") throw Error(ErrorCode::ParseError, "not a binary PPM (P6)");
  auto w = parse_int(next_token(bytes, pos));
  auto h = parse_int(next_token(bytes, pos));
  auto maxval = parse_int(next_token(bytes, pos));
  if (!w || !h || !maxval || *w <= 0 || *h <= 0) throw Error(ErrorCode::ParseError, "bad PPM header");
  if (*maxval != 255) throw Error(ErrorCode::ParseError, "only 8-bit PPM (maxval 255) is supported");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw Error(ErrorCode::ParseError, "truncated PPM header");
  }
  ++pos;
  const std::size_t height = static_cast<std::size_t>(*h), width = static_cast<std::size_t>(*w);
  const std::size_t count = height * width * 3;
  if (bytes.size() - pos < count) throw Error(ErrorCode::ParseError, "truncated PPM payload");
  std::vector<float> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    data[i] = static_cast<float>(static_cast<unsigned char>(bytes[pos + i])) / 255.0f;
  }
  return Tensor({height, width, 3}, std::move(data));
}

Tensor load_ppm(const std::filesystem::path& path) {
  try {
    return decode_ppm(read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IoError) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string encode_ppm(const Tensor& image) {
  if (image.rank() != 3 || image.dim(2) != 3) {
    throw Error(ErrorCode::ShapeError, "PPM needs an h x w x 3 image");
  }
  std::string out = "P6\n" + std::to_string(image.dim(1)) + " " + std::to_string(image.dim(0)) + "\n255\n";
  for (float v : image.data()) {
    double q = std::lround(std::clamp(static_cast<double>(v), 0.0, 1.0) * 255.0);
    out.push_back(static_cast<char>(static_cast<unsigned char>(q)));
  }
  return out;
}

void save_ppm(const std::filesystem::path& path, const Tensor& image) { write_file(path, encode_ppm(image)); }

}  // namespace smiley
