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

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hamming.hpp"

namespace hdt {

struct IndexRow {
  std::int64_t id = 0;
  BinaryCode code;
  std::vector<float> embedding;  // empty unless the index stores embeddings
};

/// Per-query cost counters.
struct QueryStats {
  std::int64_t candidates_fetched = 0;     // substring matches, with multiplicity
  std::int64_t distance_comparisons = 0;   // full-code Hamming evaluations (deduplicated)
  std::int64_t embedding_comparisons = 0;  // Euclidean evaluations while re-ranking
  std::int64_t results_returned = 0;

  QueryStats& operator+=(const QueryStats& o) {
    candidates_fetched += o.candidates_fetched;
    distance_comparisons += o.distance_comparisons;
    embedding_comparisons += o.embedding_comparisons;
    results_returned += o.results_returned;
    return *this;
  }
};

struct QueryHit {
  std::int64_t id = 0;
  int hamming = 0;
  double embedding_distance = 0;  // squared Euclidean; 0 for unranked lookups
};

struct LookupResult {
  std::vector<QueryHit> hits;
  QueryStats stats;
};

/// Hamming-radius search through r + 1 substring reverse maps. Any stored
/// code within radius r of a query agrees with it on at least one substring,
/// so probing the query's own substrings finds every result.
///
/// Thread safety: any number of concurrent readers, or one writer. Each
/// insert or remove is applied to all r + 1 maps under one exclusive lock.
class MultiIndex {
 public:
  /// `embedding_dim` > 0 stores an embedding with every row (re-ranking mode).
  MultiIndex(int bits, int radius, int embedding_dim = 0);

  MultiIndex(const MultiIndex&) = delete;
  MultiIndex& operator=(const MultiIndex&) = delete;

  int bits() const noexcept { return bits_; }
  int radius() const noexcept { return radius_; }
  int substring_count() const noexcept { return radius_ + 1; }
  const std::vector<int>& substring_lengths() const noexcept { return lengths_; }
  int embedding_dim() const noexcept { return dim_; }
  bool stores_embeddings() const noexcept { return dim_ > 0; }
  std::size_t size() const;

  /// Adds a row; a row with an existing id replaces the old one.
  void insert(const IndexRow& row);
  /// Returns false when the id is unknown.
  bool remove(std::int64_t id);
  std::optional<IndexRow> get(std::int64_t id) const;

  /// Exactly the rows within Hamming radius r, ordered by (distance, id).
  LookupResult lookup(const BinaryCode& query) const;

  /// The up-to-l radius-r rows closest to `query_embedding`, ordered by
  /// (squared Euclidean distance, id).
  LookupResult lookup_ranked(const BinaryCode& query, std::span<const float> query_embedding, int l) const;

  /// Total ids stored in reverse map i (for consistency checks).
  std::size_t map_entries(int i) const;
  /// Calls fn(id, code) for every live row, in slot order.
  void for_each_row(const std::function<void(std::int64_t, const BinaryCode&)>& fn) const;

  void save(std::ostream& out) const;
  static std::unique_ptr<MultiIndex> load(std::istream& in);
  void save(const std::string& path) const;
  static std::unique_ptr<MultiIndex> load(const std::string& path);

 private:
  using Bucket = std::vector<std::uint32_t>;
  using ReverseMap = std::unordered_map<BinaryCode, Bucket, BinaryCodeHash>;

  struct Slot {
    std::int64_t id = 0;
    BinaryCode code;
    bool live = false;
  };

  void insert_locked(const IndexRow& row);
  void remove_slot_locked(std::uint32_t slot);
  std::vector<std::uint32_t> candidates_locked(const BinaryCode& query, QueryStats& stats) const;

  int bits_;
  int radius_;
  int dim_;
  std::vector<int> lengths_;

  mutable std::shared_mutex mutex_;
  std::vector<Slot> slots_;
  std::vector<float> embeddings_;  // slot-major, dim_ per slot
  std::vector<std::uint32_t> free_slots_;
  std::unordered_map<std::int64_t, std::uint32_t> by_id_;
  std::vector<ReverseMap> maps_;
};

/// Expected substring matches per query for N uniform random codes:
/// sum over substrings of N / 2^len, i.e. (r+1) N / 2^(n/(r+1)) when r+1 divides n.
double expected_candidates(int bits, int radius, double count);

/// Radius whose substring length n/(r+1) is closest to log2(N); ties go to the smaller r.
int advise_radius(int bits, double count);

}  // namespace hdt
