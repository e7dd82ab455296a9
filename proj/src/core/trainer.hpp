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
#include <random>
#include <vector>

#include "config.hpp"
#include "dataset.hpp"
#include "model.hpp"

namespace hdt {

/// Similar-input lists for every training input, indexed by row.
struct SimilaritySource {
  std::vector<std::vector<std::int64_t>> neighbors;
};

/// Symmetrized k-nearest-neighbor relation over the rows of `inputs`: j is
/// listed for i when either is among the other's k nearest. Lists are sorted.
SimilaritySource knn_similarity(const FloatMatrix& inputs, int k);

struct BatchPlan {
  struct Group {
    std::int64_t marker = 0;
    std::vector<std::int64_t> members;  // g - 1 inputs similar to the marker
  };
  std::vector<Group> groups;
  std::int64_t skipped_markers = 0;  // candidates rejected for lack of neighbors

  /// Marker followed by its members, group by group.
  std::vector<std::int64_t> ids() const;
  std::vector<int> group_of_each() const;
};

/// b / g groups, each a random marker plus g - 1 random inputs similar to
/// it. Members are drawn without replacement when the marker has at least
/// g - 1 neighbors, with replacement otherwise.
BatchPlan sample_batch(const SimilaritySource& source, int group_size, int batch_size, std::mt19937_64& rng);
BatchPlan sample_batch(const SimilaritySource& source, int group_size, int batch_size, std::uint64_t seed);

struct TraceEntry {
  int step = 0;
  double total = 0;
  double j1 = 0;
  double j2 = 0;
  double j3 = 0;
  double learning_rate = 0;
};

struct TrainResult {
  DenseNetModel model;
  std::vector<TraceEntry> trace;
  std::int64_t skipped_markers = 0;
};

using TraceCallback = std::function<void(const TraceEntry&)>;

/// Number of SGD steps the schedule runs for a training set of `rows` inputs.
int planned_steps(const TrainSchedule& schedule, int batch_size, std::int64_t rows);

/// sample_batch -> forward -> hdt_loss -> backward -> sgd_step, repeated.
/// Throws ErrorCode::Diverged on a non-finite loss.
TrainResult train(const FloatMatrix& inputs, const SimilaritySource& source, const HdtConfig& cfg,
                  const TrainSchedule& schedule, const TraceCallback& on_step = {});

}  // namespace hdt
