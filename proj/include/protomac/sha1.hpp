#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace protomac {

/// Minimal SHA-1, enough for content addressing of run parameters.
class Sha1 {
 public:
  Sha1() { reset(); }

  void reset() {
    h_ = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u, 0xC3D2E1F0u};
    length_ = 0;
    buffer_len_ = 0;
  }

  void update(std::string_view data) {
    for (char c : data) append_byte(static_cast<std::uint8_t>(c));
    length_ += data.size();
  }

  std::string hex_digest() {
    const std::uint64_t bit_len = length_ * 8;
    append_byte(0x80);
    while (buffer_len_ != 56) append_byte(0);
    for (int i = 7; i >= 0; --i)
      append_byte(static_cast<std::uint8_t>(bit_len >> (i * 8)));
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(40);
    for (std::uint32_t word : h_) {
      for (int i = 28; i >= 0; i -= 4) out.push_back(hex[(word >> i) & 0xF]);
    }
    return out;
  }

  static std::string hash(std::string_view data) {
    Sha1 s;
    s.update(data);
    return s.hex_digest();
  }

 private:
  void append_byte(std::uint8_t b) {
    buffer_[buffer_len_++] = b;
    if (buffer_len_ == 64) {
      process_block();
      buffer_len_ = 0;
    }
  }

  static std::uint32_t rol(std::uint32_t v, int n) {
    return (v << n) | (v >> (32 - n));
  }

  void process_block() {
    std::uint32_t w[80];
    for (int i = 0; i < 16; ++i) {
      w[i] = (static_cast<std::uint32_t>(buffer_[i * 4]) << 24) |
             (static_cast<std::uint32_t>(buffer_[i * 4 + 1]) << 16) |
             (static_cast<std::uint32_t>(buffer_[i * 4 + 2]) << 8) |
             static_cast<std::uint32_t>(buffer_[i * 4 + 3]);
    }
    for (int i = 16; i < 80; ++i)
      w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
    std::uint32_t a = h_[0], b = h_[1], c = h_[2], d = h_[3], e = h_[4];
    for (int i = 0; i < 80; ++i) {
      std::uint32_t f, k;
      if (i < 20) {
        f = (b & c) | ((~b) & d);
        k = 0x5A827999u;
      } else if (i < 40) {
        f = b ^ c ^ d;
        k = 0x6ED9EBA1u;
      } else if (i < 60) {
        f = (b & c) | (b & d) | (c & d);
        k = 0x8F1BBCDCu;
      } else {
        f = b ^ c ^ d;
        k = 0xCA62C1D6u;
      }
      const std::uint32_t tmp = rol(a, 5) + f + e + k + w[i];
      e = d;
      d = c;
      c = rol(b, 30);
      b = a;
      a = tmp;
    }
    h_[0] += a;
    h_[1] += b;
    h_[2] += c;
    h_[3] += d;
    h_[4] += e;
  }

  std::array<std::uint32_t, 5> h_{};
  std::uint64_t length_ = 0;
  std::uint8_t buffer_[64]{};
  std::size_t buffer_len_ = 0;
};

}  // namespace protomac
