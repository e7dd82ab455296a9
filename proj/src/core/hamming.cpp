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

#include "hamming.hpp"

#include <istream>
#include <ostream>

#include "binary_io.hpp"
#include "error.hpp"

namespace hdt {
namespace {

void check_bits(int bits) {
  if (bits < 1 || bits > kMaxCodeBits) {
    fail(ErrorCode::InvalidArgument,
         "code length must be in [1, 256], got " + std::to_string(bits));
  }
}

// Integer bits [lo, lo + len) of `src`, shifted down to bit 0.
std::array<std::uint64_t, kCodeWords> extract(std::span<const std::uint64_t> src, int lo, int len) {
  std::array<std::uint64_t, kCodeWords> out{};
  const int out_words = (len + 63) / 64;
  for (int w = 0; w < out_words; ++w) {
    const int p = lo + 64 * w;
    const int word = p / 64;
    const int shift = p % 64;
    std::uint64_t v = word < static_cast<int>(src.size()) ? src[word] >> shift : 0;
    if (shift != 0 && word + 1 < static_cast<int>(src.size())) {
      v |= src[word + 1] << (64 - shift);
    }
    out[w] = v;
  }
  const int tail = len % 64;
  if (tail != 0) out[out_words - 1] &= (std::uint64_t{1} << tail) - 1;
  return out;
}

// ORs the low `len` bits of `src` into `dst` starting at integer bit `lo`.
void deposit(std::array<std::uint64_t, kCodeWords>& dst, std::span<const std::uint64_t> src, int lo,
             int len) {
  for (int j = 0; j < len; ++j) {
    if ((src[j / 64] >> (j % 64)) & 1U) {
      const int p = lo + j;
      dst[p / 64] |= std::uint64_t{1} << (p % 64);
    }
  }
}

}  // namespace

BinaryCode::BinaryCode(int bits) : bits_(bits) { check_bits(bits); }

BinaryCode BinaryCode::from_uint(std::uint64_t value, int bits) {
  require(bits >= 1 && bits <= 64, "from_uint requires 1 <= bits <= 64");
  BinaryCode c(bits);
  c.words_[0] = bits == 64 ? value : value & ((std::uint64_t{1} << bits) - 1);
  return c;
}

BinaryCode BinaryCode::from_string(std::string_view s) {
  BinaryCode c(static_cast<int>(s.size()));
  for (int k = 0; k < c.bits_; ++k) {
    require(s[k] == '0' || s[k] == '1', "code strings contain only '0' and '1'");
    c.set_bit(k, s[k] == '1');
  }
  return c;
}

BinaryCode BinaryCode::from_words(std::span<const std::uint64_t> words, int bits) {
  BinaryCode c(bits);
  require(words.size() >= static_cast<std::size_t>(c.word_count()), "too few words for code length");
  for (int w = 0; w < c.word_count(); ++w) c.words_[w] = words[w];
  const int tail = bits % 64;
  if (tail != 0 && (c.words_[c.word_count() - 1] >> tail) != 0) {
    fail(ErrorCode::Format, "code has nonzero padding bits");
  }
  return c;
}

bool BinaryCode::bit(int k) const {
  require(k >= 0 && k < bits_, "bit index out of range");
  const int j = bits_ - 1 - k;
  return (words_[j / 64] >> (j % 64)) & 1U;
}

void BinaryCode::set_bit(int k, bool value) {
  require(k >= 0 && k < bits_, "bit index out of range");
  const int j = bits_ - 1 - k;
  const std::uint64_t mask = std::uint64_t{1} << (j % 64);
  if (value) {
    words_[j / 64] |= mask;
  } else {
    words_[j / 64] &= ~mask;
  }
}

std::uint64_t BinaryCode::to_uint() const {
  require(bits_ <= 64, "to_uint requires a code of at most 64 bits");
  return words_[0];
}

std::string BinaryCode::to_string() const {
  std::string s(static_cast<std::size_t>(bits_), '0');
  for (int k = 0; k < bits_; ++k) {
    if (bit(k)) s[k] = '1';
  }
  return s;
}

template <typename T>
static BinaryCode binarize_impl(std::span<const T> y) {
  BinaryCode c(static_cast<int>(y.size()));
  for (int k = 0; k < c.size(); ++k) {
    if (y[k] >= T{0}) c.set_bit(k, true);
  }
  return c;
}

BinaryCode binarize(std::span<const double> y) { return binarize_impl(y); }
BinaryCode binarize(std::span<const float> y) { return binarize_impl(y); }

int hamming(const BinaryCode& a, const BinaryCode& b) {
  if (a.bits_ != b.bits_) {
    fail(ErrorCode::InvalidArgument, "hamming: code lengths differ (" + std::to_string(a.bits_) +
                                         " vs " + std::to_string(b.bits_) + ")");
  }
  int d = 0;
  for (int w = 0; w < a.word_count(); ++w) d += std::popcount(a.words_[w] ^ b.words_[w]);
  return d;
}

std::vector<int> substring_lengths(int bits, int m) {
  if (m < 1 || m > bits) {
    fail(ErrorCode::Config, "substring count must be in [1, " + std::to_string(bits) + "], got " +
                                std::to_string(m));
  }
  std::vector<int> lengths(static_cast<std::size_t>(m), bits / m);
  for (int i = 0; i < bits % m; ++i) ++lengths[i];
  return lengths;
}

std::vector<Substring> split(const BinaryCode& h, int m) {
  const auto lengths = substring_lengths(h.size(), m);
  std::vector<Substring> parts;
  parts.reserve(lengths.size());
  int start = 0;  // logical offset
  for (int i = 0; i < m; ++i) {
    const int len = lengths[i];
    const int lo = h.size() - start - len;
    const auto words = extract(h.words(), lo, len);
    parts.push_back({BinaryCode::from_words(words, len), i + 1});
    start += len;
  }
  return parts;
}

BinaryCode concat(std::span<const Substring> parts) {
  int total = 0;
  for (const auto& p : parts) total += p.bits.size();
  std::array<std::uint64_t, kCodeWords> words{};
  int start = 0;
  for (const auto& p : parts) {
    const int len = p.bits.size();
    deposit(words, p.bits.words(), total - start - len, len);
    start += len;
  }
  return BinaryCode::from_words(words, total);
}

void write_code(std::ostream& out, const BinaryCode& code) {
  io::put<std::uint16_t>(out, static_cast<std::uint16_t>(code.size()));
  for (auto w : code.words()) io::put<std::uint64_t>(out, w);
}

BinaryCode read_code(std::istream& in) {
  const int bits = io::get<std::uint16_t>(in, "code length");
  if (bits < 1 || bits > kMaxCodeBits) fail(ErrorCode::Format, "invalid code length in stream");
  std::array<std::uint64_t, kCodeWords> words{};
  for (int w = 0; w < (bits + 63) / 64; ++w) words[w] = io::get<std::uint64_t>(in, "code word");
  return BinaryCode::from_words(words, bits);
}

}  // namespace hdt
