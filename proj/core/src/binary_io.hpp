#pragma once

// Little-endian primitives shared by the binary artifact formats.

#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wsfe/error.hpp"

namespace wsfe::detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff),
                              static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), b.size());
}

inline void put_u8(std::ostream& out, std::uint8_t v) { out.put(static_cast<char>(v)); }

inline void put_magic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

inline void put_f32s(std::ostream& out, std::span<const double> values) {
  std::vector<char> buf(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(values[i]));
    for (int k = 0; k < 4; ++k) buf[i * 4 + k] = static_cast<char>((bits >> (8 * k)) & 0xff);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

/// Reads exactly n bytes or throws a truncation error naming `what`.
inline void get_bytes(std::istream& in, char* dst, std::size_t n, std::string_view what) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw ParseError("truncated file: unexpected end of data while reading " + std::string(what));
  }
}

inline std::uint32_t get_u32(std::istream& in, std::string_view what) {
  std::array<unsigned char, 4> b{};
  get_bytes(in, reinterpret_cast<char*>(b.data()), 4, what);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline std::uint8_t get_u8(std::istream& in, std::string_view what) {
  char c = 0;
  get_bytes(in, &c, 1, what);
  return static_cast<std::uint8_t>(c);
}

inline bool check_magic(std::istream& in, std::string_view magic) {
  std::string got(magic.size(), '\0');
  in.read(got.data(), static_cast<std::streamsize>(magic.size()));
  return static_cast<std::size_t>(in.gcount()) == magic.size() && got == magic;
}

/// Decodes `count` little-endian floats into doubles.
inline void get_f32s(std::istream& in, std::span<double> dst, std::string_view what) {
  std::vector<unsigned char> buf(dst.size() * 4);
  get_bytes(in, reinterpret_cast<char*>(buf.data()), buf.size(), what);
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const std::uint32_t bits = static_cast<std::uint32_t>(buf[i * 4]) |
                               (static_cast<std::uint32_t>(buf[i * 4 + 1]) << 8) |
                               (static_cast<std::uint32_t>(buf[i * 4 + 2]) << 16) |
                               (static_cast<std::uint32_t>(buf[i * 4 + 3]) << 24);
    dst[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
}

inline void expect_eof(std::istream& in, std::string_view what) {
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError(std::string(what) + ": trailing bytes after payload");
  }
}

}  // namespace wsfe::detail
