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
#include <span>
#include <vector>

#include "hamming.hpp"

namespace hdt {

using ResultLists = std::vector<std::vector<std::int64_t>>;

/// Fraction of queries whose true nearest neighbor is among the first
/// min(k, len) results. `nearest` holds one id per query.
double recall_at_k(const ResultLists& results, std::span<const std::int64_t> nearest, int k);

/// Average precision of one ranked list truncated at k: the mean of
/// precision@i over the relevant positions i <= k. 0 when none is relevant.
double average_precision(std::span<const std::int64_t> ranked, std::span<const std::int64_t> relevant, int k);

/// Mean of average_precision over queries.
double map_at_k(const ResultLists& results, const ResultLists& relevant, int k);

/// First k base ids ranked by Hamming distance to `query`, ties by ascending id.
std::vector<std::int64_t> rank_by_hamming(std::span<const BinaryCode> base, const BinaryCode& query, int k);

struct RadiusPoint {
  int radius = 0;
  double precision = 0;      // mean over queries with a nonempty radius set
  double recall = 0;         // mean over all queries
  double mean_results = 0;   // mean radius-set size
  std::int64_t queries_with_results = 0;
};

/// Precision and recall of the radius-r' result set for r' = 0..max_radius,
/// from one distance histogram per query.
std::vector<RadiusPoint> pr_at_radius(std::span<const BinaryCode> base, std::span<const BinaryCode> queries,
                                      const ResultLists& relevant, int max_radius);

}  // namespace hdt
