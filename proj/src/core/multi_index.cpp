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

#include "multi_index.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <queue>

#include "binary_io.hpp"
#include "error.hpp"

namespace hdt {
namespace {

constexpr char kSnapshotMagic[8] = {'H', 'D', 'T', 'I', 'N', 'D', 'E', 'X'};
constexpr std::uint32_t kSnapshotVersion = 1;

bool code_less(const BinaryCode& a, const BinaryCode& b) {
  const auto wa = a.words();
  const auto wb = b.words();
  return std::lexicographical_compare(wa.rbegin(), wa.rend(), wb.rbegin(), wb.rend());
}

}  // namespace

MultiIndex::MultiIndex(int bits, int radius, int embedding_dim)
    : bits_(bits), radius_(radius), dim_(embedding_dim) {
  if (bits < 1 || bits > kMaxCodeBits) fail(ErrorCode::Config, "index code length must be in [1, 256]");
  if (radius < 0 || radius >= bits) fail(ErrorCode::Config, "index radius must satisfy 0 <= r < n");
  if (embedding_dim < 0) fail(ErrorCode::Config, "embedding dimension must be nonnegative");
  lengths_ = hdt::substring_lengths(bits, radius + 1);
  maps_.resize(static_cast<std::size_t>(radius + 1));
}

std::size_t MultiIndex::size() const {
  std::shared_lock lock(mutex_);
  return by_id_.size();
}

void MultiIndex::insert(const IndexRow& row) {
  if (row.code.size() != bits_) {
    fail(ErrorCode::InvalidArgument, "row code has " + std::to_string(row.code.size()) + " bits, index expects " +
                                         std::to_string(bits_));
  }
  if (stores_embeddings() && static_cast<int>(row.embedding.size()) != dim_) {
    fail(ErrorCode::InvalidArgument, "index stores embeddings of dimension " + std::to_string(dim_) +
                                         "; row has " + std::to_string(row.embedding.size()));
  }
  std::unique_lock lock(mutex_);
  insert_locked(row);
}

void MultiIndex::insert_locked(const IndexRow& row) {
  if (const auto it = by_id_.find(row.id); it != by_id_.end()) remove_slot_locked(it->second);

  std::uint32_t slot;
  if (!free_slots_.empty()) {
    slot = free_slots_.back();
    free_slots_.pop_back();
  } else {
    slot = static_cast<std::uint32_t>(slots_.size());
    slots_.emplace_back();
    embeddings_.resize(embeddings_.size() + static_cast<std::size_t>(dim_));
  }
  slots_[slot] = {row.id, row.code, true};
  if (stores_embeddings()) {
    std::copy(row.embedding.begin(), row.embedding.end(), embeddings_.begin() + static_cast<std::ptrdiff_t>(slot) * dim_);
  }
  by_id_[row.id] = slot;
  const auto parts = split(row.code, substring_count());
  for (int i = 0; i < substring_count(); ++i) maps_[i][parts[i].bits].push_back(slot);
}

void MultiIndex::remove_slot_locked(std::uint32_t slot) {
  auto& s = slots_[slot];
  const auto parts = split(s.code, substring_count());
  for (int i = 0; i < substring_count(); ++i) {
    auto it = maps_[i].find(parts[i].bits);
    if (it == maps_[i].end()) continue;
    auto& bucket = it->second;
    bucket.erase(std::remove(bucket.begin(), bucket.end(), slot), bucket.end());
    if (bucket.empty()) maps_[i].erase(it);
  }
  by_id_.erase(s.id);
  s.live = false;
  free_slots_.push_back(slot);
}

bool MultiIndex::remove(std::int64_t id) {
  std::unique_lock lock(mutex_);
  const auto it = by_id_.find(id);
  if (it == by_id_.end()) return false;
  remove_slot_locked(it->second);
  return true;
}

std::optional<IndexRow> MultiIndex::get(std::int64_t id) const {
  std::shared_lock lock(mutex_);
  const auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  IndexRow row{id, slots_[it->second].code, {}};
  if (stores_embeddings()) {
    const auto begin = embeddings_.begin() + static_cast<std::ptrdiff_t>(it->second) * dim_;
    row.embedding.assign(begin, begin + dim_);
  }
  return row;
}

std::vector<std::uint32_t> MultiIndex::candidates_locked(const BinaryCode& query, QueryStats& stats) const {
  if (query.size() != bits_) {
    fail(ErrorCode::InvalidArgument, "query code has " + std::to_string(query.size()) + " bits, index expects " +
                                         std::to_string(bits_));
  }
  std::vector<std::uint32_t> found;
  const auto parts = split(query, substring_count());
  for (int i = 0; i < substring_count(); ++i) {
    const auto it = maps_[i].find(parts[i].bits);
    if (it != maps_[i].end()) found.insert(found.end(), it->second.begin(), it->second.end());
  }
  stats.candidates_fetched = static_cast<std::int64_t>(found.size());
  std::sort(found.begin(), found.end());
  found.erase(std::unique(found.begin(), found.end()), found.end());
  stats.distance_comparisons = static_cast<std::int64_t>(found.size());
  return found;
}

LookupResult MultiIndex::lookup(const BinaryCode& query) const {
  std::shared_lock lock(mutex_);
  LookupResult result;
  for (const auto slot : candidates_locked(query, result.stats)) {
    const int d = hamming(slots_[slot].code, query);
    if (d <= radius_) result.hits.push_back({slots_[slot].id, d, 0.0});
  }
  std::sort(result.hits.begin(), result.hits.end(), [](const QueryHit& a, const QueryHit& b) {
    return a.hamming != b.hamming ? a.hamming < b.hamming : a.id < b.id;
  });
  result.stats.results_returned = static_cast<std::int64_t>(result.hits.size());
  return result;
}

LookupResult MultiIndex::lookup_ranked(const BinaryCode& query, std::span<const float> query_embedding, int l) const {
  if (!stores_embeddings()) fail(ErrorCode::State, "lookup_ranked needs an index built with embeddings");
  if (static_cast<int>(query_embedding.size()) != dim_) {
    fail(ErrorCode::InvalidArgument, "query embedding has dimension " + std::to_string(query_embedding.size()) +
                                         ", index stores " + std::to_string(dim_));
  }
  require(l >= 1, "lookup_ranked needs l >= 1");

  std::shared_lock lock(mutex_);
  LookupResult result;
  // Max-heap on (distance, id): the worst of the current best l on top.
  auto worse = [](const QueryHit& a, const QueryHit& b) {
    return a.embedding_distance != b.embedding_distance ? a.embedding_distance < b.embedding_distance : a.id < b.id;
  };
  std::priority_queue<QueryHit, std::vector<QueryHit>, decltype(worse)> best(worse);
  for (const auto slot : candidates_locked(query, result.stats)) {
    const int d = hamming(slots_[slot].code, query);
    if (d > radius_) continue;
    const float* e = embeddings_.data() + static_cast<std::ptrdiff_t>(slot) * dim_;
    double dist = 0.0;
    for (int j = 0; j < dim_; ++j) {
      const double diff = static_cast<double>(e[j]) - static_cast<double>(query_embedding[j]);
      dist += diff * diff;
    }
    ++result.stats.embedding_comparisons;
    const QueryHit hit{slots_[slot].id, d, dist};
    if (static_cast<int>(best.size()) < l) {
      best.push(hit);
    } else if (worse(hit, best.top())) {
      best.pop();
      best.push(hit);
    }
  }
  result.hits.resize(best.size());
  for (auto i = static_cast<std::ptrdiff_t>(best.size()) - 1; i >= 0; --i) {
    result.hits[i] = best.top();
    best.pop();
  }
  result.stats.results_returned = static_cast<std::int64_t>(result.hits.size());
  return result;
}

std::size_t MultiIndex::map_entries(int i) const {
  require(i >= 0 && i < substring_count(), "map index out of range");
  std::shared_lock lock(mutex_);
  std::size_t total = 0;
  for (const auto& [key, bucket] : maps_[i]) total += bucket.size();
  return total;
}

void MultiIndex::for_each_row(const std::function<void(std::int64_t, const BinaryCode&)>& fn) const {
  std::shared_lock lock(mutex_);
  for (const auto& s : slots_) {
    if (s.live) fn(s.id, s.code);
  }
}

// Snapshot layout (little-endian):
//   char[8] "HDTINDEX", u32 version, u16 bits, u16 radius, u32 embedding_dim,
//   u64 row count, then per row: i64 id, code, f32[embedding_dim];
//   u32 map count (= radius + 1), then per map: u16 substring length,
//   u64 bucket count, per bucket: code key, u64 id count, i64 ids.
// A code is u16 bit length followed by ceil(bits/64) u64 words.
void MultiIndex::save(std::ostream& out) const {
  std::shared_lock lock(mutex_);
  io::put_bytes(out, kSnapshotMagic, sizeof(kSnapshotMagic));
  io::put<std::uint32_t>(out, kSnapshotVersion);
  io::put<std::uint16_t>(out, static_cast<std::uint16_t>(bits_));
  io::put<std::uint16_t>(out, static_cast<std::uint16_t>(radius_));
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(dim_));
  io::put<std::uint64_t>(out, by_id_.size());
  for (std::size_t slot = 0; slot < slots_.size(); ++slot) {
    const auto& s = slots_[slot];
    if (!s.live) continue;
    io::put<std::int64_t>(out, s.id);
    write_code(out, s.code);
    for (int j = 0; j < dim_; ++j) io::put<float>(out, embeddings_[slot * dim_ + j]);
  }
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(maps_.size()));
  for (std::size_t i = 0; i < maps_.size(); ++i) {
    io::put<std::uint16_t>(out, static_cast<std::uint16_t>(lengths_[i]));
    std::vector<const ReverseMap::value_type*> buckets;
    for (const auto& entry : maps_[i]) buckets.push_back(&entry);
    std::sort(buckets.begin(), buckets.end(), [](auto* a, auto* b) { return code_less(a->first, b->first); });
    io::put<std::uint64_t>(out, buckets.size());
    for (const auto* entry : buckets) {
      write_code(out, entry->first);
      io::put<std::uint64_t>(out, entry->second.size());
      for (const auto slot : entry->second) io::put<std::int64_t>(out, slots_[slot].id);
    }
  }
  if (!out) fail(ErrorCode::Io, "failed writing index snapshot");
}

std::unique_ptr<MultiIndex> MultiIndex::load(std::istream& in) {
  char magic[8];
  io::get_bytes(in, magic, sizeof(magic), "snapshot magic");
  if (std::memcmp(magic, kSnapshotMagic, sizeof(magic)) != 0) fail(ErrorCode::Format, "not an HDT index snapshot");
  const auto version = io::get<std::uint32_t>(in, "snapshot version");
  if (version != kSnapshotVersion) fail(ErrorCode::Format, "unsupported snapshot version " + std::to_string(version));
  const int bits = io::get<std::uint16_t>(in, "bits");
  const int radius = io::get<std::uint16_t>(in, "radius");
  const int dim = static_cast<int>(io::get<std::uint32_t>(in, "embedding dim"));
  auto index = std::make_unique<MultiIndex>(bits, radius, dim);

  const auto rows = io::get<std::uint64_t>(in, "row count");
  for (std::uint64_t i = 0; i < rows; ++i) {
    const auto id = io::get<std::int64_t>(in, "row id");
    const BinaryCode code = read_code(in);
    if (code.size() != bits) fail(ErrorCode::Format, "snapshot row has wrong code length");
    if (index->by_id_.contains(id)) fail(ErrorCode::Format, "snapshot repeats row id " + std::to_string(id));
    const auto slot = static_cast<std::uint32_t>(index->slots_.size());
    index->slots_.push_back({id, code, true});
    for (int j = 0; j < dim; ++j) index->embeddings_.push_back(io::get<float>(in, "embedding"));
    index->by_id_[id] = slot;
  }

  const auto map_count = io::get<std::uint32_t>(in, "map count");
  if (map_count != static_cast<std::uint32_t>(radius + 1)) fail(ErrorCode::Format, "snapshot map count mismatch");
  for (std::uint32_t i = 0; i < map_count; ++i) {
    if (io::get<std::uint16_t>(in, "substring length") != index->lengths_[i]) {
      fail(ErrorCode::Format, "snapshot substring length mismatch");
    }
    const auto buckets = io::get<std::uint64_t>(in, "bucket count");
    std::size_t entries = 0;
    for (std::uint64_t b = 0; b < buckets; ++b) {
      const BinaryCode key = read_code(in);
      const auto count = io::get<std::uint64_t>(in, "bucket size");
      auto& bucket = index->maps_[i][key];
      for (std::uint64_t k = 0; k < count; ++k) {
        const auto id = io::get<std::int64_t>(in, "bucket id");
        const auto it = index->by_id_.find(id);
        if (it == index->by_id_.end()) fail(ErrorCode::Format, "snapshot bucket names an unknown id");
        if (split(index->slots_[it->second].code, radius + 1)[i].bits != key) {
          fail(ErrorCode::Format, "snapshot bucket key disagrees with the stored code");
        }
        bucket.push_back(it->second);
      }
      entries += count;
    }
    if (entries != rows) fail(ErrorCode::Format, "snapshot map " + std::to_string(i) + " does not list every row once");
  }
  return index;
}

void MultiIndex::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open " + path + " for writing");
  save(out);
}

std::unique_ptr<MultiIndex> MultiIndex::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open index snapshot " + path);
  return load(in);
}

double expected_candidates(int bits, int radius, double count) {
  double total = 0.0;
  for (int len : substring_lengths(bits, radius + 1)) total += count / std::exp2(len);
  return total;
}

int advise_radius(int bits, double count) {
  require(bits >= 1 && count >= 1, "advise_radius needs n >= 1 and N >= 1");
  const double target = std::log2(count);
  int best = 0;
  double best_gap = INFINITY;
  for (int r = 0; r < bits; ++r) {
    const double gap = std::fabs(static_cast<double>(bits) / (r + 1) - target);
    if (gap < best_gap) {
      best_gap = gap;
      best = r;
    }
  }
  return best;
}

}  // namespace hdt
