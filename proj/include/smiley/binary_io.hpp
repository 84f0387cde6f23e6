#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "smiley/error.hpp"

namespace smiley {

template <typename T>
  requires std::is_unsigned_v<T>
void write_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> buf;
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(buf.data(), buf.size());
}

inline void read_exact(std::istream& in, char* dst, std::size_t n, const char* what) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw Error(ErrorCode::ParseError, std::string("truncated input reading ") + what);
  }
}

template <typename T>
  requires std::is_unsigned_v<T>
T read_le(std::istream& in, const char* what) {
  std::array<char, sizeof(T)> buf;
  read_exact(in, buf.data(), buf.size(), what);
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(static_cast<unsigned char>(buf[i])) << (8 * i);
  }
  return value;
}

}  // namespace smiley
