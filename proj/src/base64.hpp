#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ctxgate::detail {

inline constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::string base64_encode(std::string_view input) {
  std::string out;
  out.reserve((input.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 3 <= input.size()) {
    std::uint32_t n = (static_cast<unsigned char>(input[i]) << 16) |
                      (static_cast<unsigned char>(input[i + 1]) << 8) |
                      static_cast<unsigned char>(input[i + 2]);
    out.push_back(kB64Alphabet[(n >> 18) & 63]);
    out.push_back(kB64Alphabet[(n >> 12) & 63]);
    out.push_back(kB64Alphabet[(n >> 6) & 63]);
    out.push_back(kB64Alphabet[n & 63]);
    i += 3;
  }
  const std::size_t rest = input.size() - i;
  if (rest == 1) {
    std::uint32_t n = static_cast<unsigned char>(input[i]) << 16;
    out.push_back(kB64Alphabet[(n >> 18) & 63]);
    out.push_back(kB64Alphabet[(n >> 12) & 63]);
    out.push_back('=');
    out.push_back('=');
  } else if (rest == 2) {
    std::uint32_t n = (static_cast<unsigned char>(input[i]) << 16) |
                      (static_cast<unsigned char>(input[i + 1]) << 8);
    out.push_back(kB64Alphabet[(n >> 18) & 63]);
    out.push_back(kB64Alphabet[(n >> 12) & 63]);
    out.push_back(kB64Alphabet[(n >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

inline int base64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

// Throws std::invalid_argument on anything that is not canonical base64.
inline std::string base64_decode(std::string_view input) {
  if (input.size() % 4 != 0) throw std::invalid_argument("base64 length not a multiple of 4");
  std::string out;
  out.reserve(input.size() / 4 * 3);
  for (std::size_t i = 0; i < input.size(); i += 4) {
    int vals[4];
    int pad = 0;
    for (int j = 0; j < 4; ++j) {
      char c = input[i + j];
      if (c == '=') {
        if (i + 4 != input.size() || j < 2) throw std::invalid_argument("misplaced base64 padding");
        vals[j] = 0;
        ++pad;
      } else {
        if (pad > 0) throw std::invalid_argument("base64 data after padding");
        vals[j] = base64_value(c);
        if (vals[j] < 0) throw std::invalid_argument("invalid base64 character");
      }
    }
    std::uint32_t n = (vals[0] << 18) | (vals[1] << 12) | (vals[2] << 6) | vals[3];
    out.push_back(static_cast<char>((n >> 16) & 0xFF));
    if (pad < 2) out.push_back(static_cast<char>((n >> 8) & 0xFF));
    if (pad < 1) out.push_back(static_cast<char>(n & 0xFF));
  }
  return out;
}

}  // namespace ctxgate::detail
