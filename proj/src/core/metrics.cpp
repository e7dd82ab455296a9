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


#include "metrics.hpp"

#include <algorithm>
#include <unordered_set>

#include "error.hpp"

namespace hdt {

double recall_at_k(const ResultLists& results, std::span<const std::int64_t> nearest, int k) {
  require(k >= 1, "recall_at_k needs k >= 1");
  if (nearest.size() != results.size()) {
    fail(ErrorCode::InvalidArgument, "recall_at_k needs a ground-truth nearest neighbor for every query");
  }
  if (results.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t q = 0; q < results.size(); ++q) {
    const auto& list = results[q];
    const auto end = list.begin() + std::min<std::ptrdiff_t>(k, static_cast<std::ptrdiff_t>(list.size()));
    hits += std::find(list.begin(), end, nearest[q]) != end ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

double average_precision(std::span<const std::int64_t> ranked, std::span<const std::int64_t> relevant, int k) {
  require(k >= 1, "average_precision needs k >= 1");
  const std::unordered_set<std::int64_t> rel(relevant.begin(), relevant.end());
  double sum = 0.0;
  int found = 0;
  const int depth = std::min<int>(k, static_cast<int>(ranked.size()));
  for (int i = 0; i < depth; ++i) {
    if (rel.contains(ranked[i])) {
      ++found;
      sum += static_cast<double>(found) / (i + 1);
    }
  }
  return found ? sum / found : 0.0;
}

double map_at_k(const ResultLists& results, const ResultLists& relevant, int k) {
  require(results.size() == relevant.size(), "map_at_k needs relevance labels for every query");
  if (results.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t q = 0; q < results.size(); ++q) total += average_precision(results[q], relevant[q], k);
  return total / static_cast<double>(results.size());
}

std::vector<std::int64_t> rank_by_hamming(std::span<const BinaryCode> base, const BinaryCode& query, int k) {
  require(k >= 0, "rank_by_hamming needs k >= 0");
  // Counting sort on distance keeps ascending ids within each distance.
  std::vector<std::vector<std::int64_t>> by_distance(static_cast<std::size_t>(query.size()) + 1);
  for (std::size_t i = 0; i < base.size(); ++i) by_distance[hamming(base[i], query)].push_back(static_cast<std::int64_t>(i));
  std::vector<std::int64_t> out;
  out.reserve(std::min<std::size_t>(static_cast<std::size_t>(k), base.size()));
  for (const auto& bucket : by_distance) {
    for (auto id : bucket) {
      if (static_cast<int>(out.size()) == k) return out;
      out.push_back(id);
    }
  }
  return out;
}

std::vector<RadiusPoint> pr_at_radius(std::span<const BinaryCode> base, std::span<const BinaryCode> queries,
                                      const ResultLists& relevant, int max_radius) {
  require(relevant.size() == queries.size(), "pr_at_radius needs relevance labels for every query");
  require(max_radius >= 0, "pr_at_radius needs max_radius >= 0");
  std::vector<RadiusPoint> table(static_cast<std::size_t>(max_radius) + 1);
  for (int r = 0; r <= max_radius; ++r) table[r].radius = r;
  if (queries.empty()) return table;

  std::vector<std::int64_t> all(static_cast<std::size_t>(max_radius) + 1);
  std::vector<std::int64_t> hit(all.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const std::unordered_set<std::int64_t> rel(relevant[q].begin(), relevant[q].end());
    std::fill(all.begin(), all.end(), 0);
    std::fill(hit.begin(), hit.end(), 0);
    for (std::size_t i = 0; i < base.size(); ++i) {
      const int d = hamming(base[i], queries[q]);
      if (d > max_radius) continue;
      ++all[d];
      hit[d] += rel.contains(static_cast<std::int64_t>(i)) ? 1 : 0;
    }
    std::int64_t cum_all = 0, cum_hit = 0;
    for (int r = 0; r <= max_radius; ++r) {
      cum_all += all[r];
      cum_hit += hit[r];
      auto& point = table[r];
      point.mean_results += static_cast<double>(cum_all);
      if (cum_all > 0) {
        point.precision += static_cast<double>(cum_hit) / static_cast<double>(cum_all);
        ++point.queries_with_results;
      }
      if (!rel.empty()) point.recall += static_cast<double>(cum_hit) / static_cast<double>(rel.size());
    }
  }
  const auto count = static_cast<double>(queries.size());
  for (auto& point : table) {
    if (point.queries_with_results > 0) point.precision /= static_cast<double>(point.queries_with_results);
    point.recall /= count;
    point.mean_results /= count;
  }
  return table;
}

}  // namespace hdt
