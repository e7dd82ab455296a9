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


#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <random>
#include <sstream>
#include <thread>

#include "error.hpp"
#include "multi_index.hpp"

namespace hdt {
namespace {

// Independent radius scan over raw integers.
std::vector<std::int64_t> brute_force(const std::vector<std::uint64_t>& codes, std::uint64_t q, int r) {
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (std::popcount(codes[i] ^ q) <= r) out.push_back(static_cast<std::int64_t>(i));
  }
  return out;
}

std::vector<std::int64_t> ids_of(const LookupResult& r) {
  std::vector<std::int64_t> out;
  for (const auto& h : r.hits) out.push_back(h.id);
  std::sort(out.begin(), out.end());
  return out;
}

void expect_consistent(const QueryStats& s) {
  EXPECT_LE(s.results_returned, s.distance_comparisons);
  EXPECT_LE(s.distance_comparisons, s.candidates_fetched);
}

TEST(MultiIndex, EmptyIndexAndSelfLookup) {
  MultiIndex index(16, 1);
  const auto code = BinaryCode::from_uint(0xBEEF, 16);
  EXPECT_TRUE(index.lookup(code).hits.empty());
  index.insert({42, code, {}});
  const auto result = index.lookup(code);
  ASSERT_EQ(result.hits.size(), 1u);
  EXPECT_EQ(result.hits[0].id, 42);
  EXPECT_EQ(result.hits[0].hamming, 0);
}

TEST(MultiIndex, MatchesBruteForceOnRandomCodes) {
  std::mt19937_64 rng(1);
  std::vector<std::uint64_t> codes(10000);
  for (auto& c : codes) c = rng() & 0xFFFFFFFFULL;
  for (int r : {0, 1, 3}) {
    MultiIndex index(32, r);
    for (std::size_t i = 0; i < codes.size(); ++i) {
      index.insert({static_cast<std::int64_t>(i), BinaryCode::from_uint(codes[i], 32), {}});
    }
    for (int i = 0; i < r + 1; ++i) EXPECT_EQ(index.map_entries(i), codes.size());
    for (int q = 0; q < 1000; ++q) {
      // Half the queries are perturbed stored codes so results are nonempty.
      std::uint64_t query = rng() & 0xFFFFFFFFULL;
      if (q % 2 == 0) query = codes[rng() % codes.size()] ^ (1ULL << (rng() % 32)) ^ (1ULL << (rng() % 32));
      const auto result = index.lookup(BinaryCode::from_uint(query, 32));
      ASSERT_EQ(ids_of(result), brute_force(codes, query, r)) << "r=" << r << " query " << q;
      expect_consistent(result.stats);
      EXPECT_TRUE(std::is_sorted(result.hits.begin(), result.hits.end(), [](const QueryHit& a, const QueryHit& b) {
        return a.hamming != b.hamming ? a.hamming < b.hamming : a.id < b.id;
      }));
    }
  }
}

TEST(MultiIndex, ExhaustiveSmallCodes) {
  for (int r : {0, 1, 2, 3}) {
    std::vector<std::uint64_t> codes(256);
    MultiIndex index(8, r);
    for (std::uint64_t v = 0; v < 256; ++v) {
      codes[v] = v;
      index.insert({static_cast<std::int64_t>(v), BinaryCode::from_uint(v, 8), {}});
    }
    for (std::uint64_t q = 0; q < 256; ++q) {
      EXPECT_EQ(ids_of(index.lookup(BinaryCode::from_uint(q, 8))), brute_force(codes, q, r));
    }
  }
}

TEST(MultiIndex, AdversarialNearMissIsExcluded) {
  // r = 1, two 4-bit blocks; flipping one bit in each block gives distance 2.
  MultiIndex index(8, 1);
  index.insert({1, BinaryCode::from_string("10001000"), {}});
  const auto result = index.lookup(BinaryCode::from_string("00000000"));
  EXPECT_TRUE(result.hits.empty());
  EXPECT_EQ(result.stats.candidates_fetched, 0);
}

TEST(MultiIndex, ReinsertReplacesAndRemoveForgets) {
  MultiIndex index(16, 1);
  const auto a = BinaryCode::from_uint(0x1234, 16);
  const auto b = BinaryCode::from_uint(0xFEDC, 16);
  index.insert({7, a, {}});
  index.insert({8, a, {}});
  index.insert({7, b, {}});
  EXPECT_EQ(index.size(), 2u);
  for (int i = 0; i < 2; ++i) EXPECT_EQ(index.map_entries(i), 2u);
  EXPECT_EQ(ids_of(index.lookup(a)), (std::vector<std::int64_t>{8}));
  EXPECT_EQ(ids_of(index.lookup(b)), (std::vector<std::int64_t>{7}));
  EXPECT_EQ(index.get(7)->code, b);

  EXPECT_TRUE(index.remove(8));
  EXPECT_FALSE(index.remove(8));
  EXPECT_TRUE(index.lookup(a).hits.empty());
  EXPECT_FALSE(index.get(8).has_value());
  for (int i = 0; i < 2; ++i) EXPECT_EQ(index.map_entries(i), 1u);
}

TEST(MultiIndex, RejectsMismatchedRows) {
  MultiIndex index(16, 1, 3);
  EXPECT_THROW(index.insert({1, BinaryCode::from_uint(1, 8), {0, 0, 0}}), Error);
  EXPECT_THROW(index.insert({1, BinaryCode::from_uint(1, 16), {0, 0}}), Error);
  EXPECT_THROW(MultiIndex(16, 16), Error);
  MultiIndex plain(16, 1);
  const std::vector<float> q{0, 0, 0};
  EXPECT_THROW(plain.lookup_ranked(BinaryCode(16), q, 5), Error);
}

TEST(MultiIndex, RankedLookupMatchesFullSort) {
  std::mt19937_64 rng(4);
  std::normal_distribution<float> normal;
  constexpr int kDim = 5;
  MultiIndex index(12, 3, kDim);
  std::vector<std::vector<float>> embeddings(3000);
  std::vector<std::uint64_t> codes(3000);
  for (std::size_t i = 0; i < codes.size(); ++i) {
    codes[i] = rng() & 0xFFF;
    embeddings[i].resize(kDim);
    for (auto& e : embeddings[i]) e = normal(rng);
    index.insert({static_cast<std::int64_t>(i), BinaryCode::from_uint(codes[i], 12), embeddings[i]});
  }
  for (int q = 0; q < 50; ++q) {
    const std::uint64_t code = rng() & 0xFFF;
    std::vector<float> emb(kDim);
    for (auto& e : emb) e = normal(rng);
    // Oracle: full sort of the radius set by (distance, id).
    std::vector<std::pair<double, std::int64_t>> expected;
    for (auto id : brute_force(codes, code, 3)) {
      double d = 0;
      for (int j = 0; j < kDim; ++j) d += (double(embeddings[id][j]) - emb[j]) * (double(embeddings[id][j]) - emb[j]);
      expected.emplace_back(d, id);
    }
    std::sort(expected.begin(), expected.end());
    for (int l : {1, 10, 100000}) {
      const auto result = index.lookup_ranked(BinaryCode::from_uint(code, 12), emb, l);
      const std::size_t want = std::min<std::size_t>(l, expected.size());
      ASSERT_EQ(result.hits.size(), want);
      for (std::size_t k = 0; k < want; ++k) {
        EXPECT_EQ(result.hits[k].id, expected[k].second);
        EXPECT_NEAR(result.hits[k].embedding_distance, expected[k].first, 1e-9);
      }
      EXPECT_EQ(result.stats.embedding_comparisons, static_cast<std::int64_t>(expected.size()));
      expect_consistent(result.stats);
    }
  }
}

TEST(MultiIndex, RankedTiesBreakById) {
  MultiIndex index(8, 0, 2);
  const auto code = BinaryCode::from_uint(3, 8);
  index.insert({9, code, {1, 1}});
  index.insert({4, code, {1, 1}});
  index.insert({6, code, {5, 5}});
  const std::vector<float> q{1, 1};
  const auto result = index.lookup_ranked(code, q, 2);
  ASSERT_EQ(result.hits.size(), 2u);
  EXPECT_EQ(result.hits[0].id, 4);
  EXPECT_EQ(result.hits[1].id, 9);
  EXPECT_EQ(result.hits[0].embedding_distance, 0.0);
}

TEST(MultiIndex, SnapshotRoundTrip) {
  std::mt19937_64 rng(5);
  MultiIndex index(20, 3, 2);
  for (int i = 0; i < 500; ++i) {
    index.insert({i * 3, BinaryCode::from_uint(rng() & 0xFFFFF, 20), {float(i), -float(i)}});
  }
  index.remove(9);
  std::stringstream buffer;
  index.save(buffer);
  const std::string bytes = buffer.str();
  EXPECT_EQ(bytes.substr(0, 8), "HDTINDEX");

  auto loaded = MultiIndex::load(buffer);
  EXPECT_EQ(loaded->size(), index.size());
  EXPECT_EQ(loaded->radius(), 3);
  for (int q = 0; q < 200; ++q) {
    const auto code = BinaryCode::from_uint(rng() & 0xFFFFF, 20);
    EXPECT_EQ(ids_of(loaded->lookup(code)), ids_of(index.lookup(code)));
  }
  EXPECT_EQ(loaded->get(12)->embedding, (std::vector<float>{4, -4}));

  // Saving the loaded index reproduces the bytes.
  std::stringstream again;
  loaded->save(again);
  EXPECT_EQ(again.str(), bytes);

  std::stringstream truncated(bytes.substr(0, bytes.size() / 2));
  EXPECT_THROW(MultiIndex::load(truncated), Error);
  std::string corrupt = bytes;
  corrupt[0] = 'X';
  std::stringstream bad(corrupt);
  try {
    MultiIndex::load(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Format);
  }
}

TEST(MultiIndex, ConcurrentReadersSeeWholeRows) {
  MultiIndex index(16, 1);
  const auto a = BinaryCode::from_uint(0x0000, 16);
  const auto b = BinaryCode::from_uint(0xFFFF, 16);
  for (int i = 1; i <= 100; ++i) index.insert({i, a, {}});
  std::atomic<bool> stop{false};
  std::atomic<int> bad{0};
  std::thread writer([&] {
    for (int k = 0; k < 2000; ++k) index.insert({0, k % 2 ? a : b, {}});
    stop = true;
  });
  std::vector<std::thread> readers;
  for (int t = 0; t < 2; ++t) {
    readers.emplace_back([&] {
      for (int it = 0; it < 300 || !stop; ++it) {
        const auto ra = index.lookup(a);
        const auto rb = index.lookup(b);
        // Row 0 holds one code at a time; every other row stays put.
        if (ra.hits.size() < 100 || ra.hits.size() > 101 || rb.hits.size() > 1) ++bad;
        for (const auto& h : ra.hits) bad += h.hamming > 1;
      }
    });
  }
  writer.join();
  for (auto& t : readers) t.join();
  EXPECT_EQ(bad.load(), 0);
}

TEST(CostModel, ExpectedCandidates) {
  EXPECT_DOUBLE_EQ(expected_candidates(32, 1, std::ldexp(1.0, 20)), 32.0);
  EXPECT_DOUBLE_EQ(expected_candidates(16, 0, 65536.0 * 4), 4.0);
  // Uneven split: 10 bits in 3 blocks of 4, 3, 3.
  EXPECT_DOUBLE_EQ(expected_candidates(10, 2, 1024), 64.0 + 128 + 128);
}

TEST(CostModel, EmpiricalCandidatesMatchFormula) {
  std::mt19937_64 rng(6);
  const int count = 1 << 17;
  MultiIndex index(32, 1);
  for (int i = 0; i < count; ++i) index.insert({i, BinaryCode::from_uint(rng() & 0xFFFFFFFF, 32), {}});
  double total = 0;
  const int queries = 2000;
  for (int q = 0; q < queries; ++q) total += index.lookup(BinaryCode::from_uint(rng() & 0xFFFFFFFF, 32)).stats.candidates_fetched;
  const double expected = expected_candidates(32, 1, count);
  EXPECT_NEAR(total / queries, expected, 0.2 * expected);
}

TEST(CostModel, AdviseRadius) {
  EXPECT_EQ(advise_radius(64, 1e6), 2);
  EXPECT_EQ(advise_radius(32, 1e6), 1);
  EXPECT_EQ(advise_radius(16, 65536), 0);
  EXPECT_EQ(advise_radius(8, 1), 7);
  // n / (r + 1) = 12 or 8 around log2 N = 10: equal gaps resolve to the smaller r.
  EXPECT_EQ(advise_radius(24, 1024), 1);
}

}  // namespace
}  // namespace hdt
