// Copyright 2026 The HDT Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hdt {

inline constexpr int kMaxCodeBits = 256;
inline constexpr int kCodeWords = kMaxCodeBits / 64;

/// An n-bit binary code. Logical bit 0 is the most significant bit of the
/// code read as an n-bit unsigned integer; the integer is stored as
/// little-endian 64-bit words. Bits above n are always zero.
class BinaryCode {
 public:
  BinaryCode() = default;
  /// All-zero code of `bits` bits.
  explicit BinaryCode(int bits);

  /// Low `bits` bits of `value`; requires bits <= 64.
  static BinaryCode from_uint(std::uint64_t value, int bits);
  /// Parses a string of '0'/'1', logical bit 0 first.
  static BinaryCode from_string(std::string_view s);
  /// Takes ceil(bits/64) little-endian words; padding must be zero.
  static BinaryCode from_words(std::span<const std::uint64_t> words, int bits);

  int size() const noexcept { return bits_; }
  int word_count() const noexcept { return (bits_ + 63) / 64; }
  std::span<const std::uint64_t> words() const noexcept {
    return {words_.data(), static_cast<std::size_t>(word_count())};
  }

  bool bit(int k) const;
  void set_bit(int k, bool value);

  /// Value as an integer; requires size() <= 64.
  std::uint64_t to_uint() const;
  std::string to_string() const;

  friend bool operator==(const BinaryCode& a, const BinaryCode& b) noexcept {
    return a.bits_ == b.bits_ && a.words_ == b.words_;
  }

 private:
  friend int hamming(const BinaryCode& a, const BinaryCode& b);
  friend struct BinaryCodeHash;

  std::array<std::uint64_t, kCodeWords> words_{};
  int bits_ = 0;
};

struct BinaryCodeHash {
  std::size_t operator()(const BinaryCode& c) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(c.bits_);
    for (int w = 0; w < c.word_count(); ++w) {
      h ^= c.words_[w] + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      h *= 0xff51afd7ed558ccdULL;
      h ^= h >> 33;
    }
    return static_cast<std::size_t>(h);
  }
};

/// A contiguous block of a parent code.
struct Substring {
  BinaryCode bits;
  int position = 1;  // 1-based index within the parent
};

/// Sign binarization: bit k is set iff y[k] >= 0.
BinaryCode binarize(std::span<const double> y);
BinaryCode binarize(std::span<const float> y);

/// Number of differing bits (XOR + popcount per word). Throws on length mismatch.
int hamming(const BinaryCode& a, const BinaryCode& b);

/// Lengths of the m contiguous substrings of an n-bit code: the first n % m
/// blocks carry one extra bit.
std::vector<int> substring_lengths(int bits, int m);

/// Splits into m contiguous substrings, most significant block first.
std::vector<Substring> split(const BinaryCode& h, int m);

/// Inverse of split.
BinaryCode concat(std::span<const Substring> parts);

/// Writes u16 n followed by ceil(n/64) little-endian u64 words.
void write_code(std::ostream& out, const BinaryCode& code);
BinaryCode read_code(std::istream& in);

}  // namespace hdt
