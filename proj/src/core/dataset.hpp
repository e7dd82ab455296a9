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
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hdt {

using FloatMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IntMatrix = Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Element types of the xvecs family: fvecs, bvecs, ivecs.
enum class ElementKind { Real32, Byte, Int32 };

std::size_t element_size(ElementKind kind);

/// Each record is a little-endian i32 dimension d followed by d elements.
/// Every record must share d and the file size must be an exact multiple of
/// the record size. `max_rows` > 0 stops after that many records.
FloatMatrix read_xvecs(const std::string& path, ElementKind kind, std::int64_t max_rows = 0);
IntMatrix read_ivecs(const std::string& path, std::int64_t max_rows = 0);

/// Writes fvecs (Real32) or bvecs (Byte; values are rounded and must fit in [0, 255]).
void write_xvecs(const std::string& path, const FloatMatrix& m, ElementKind kind);
void write_ivecs(const std::string& path, const IntMatrix& m);

/// Picks the element kind from a .fvecs / .bvecs / .ivecs extension.
ElementKind kind_from_extension(const std::string& path);

/// Exact k nearest base rows for each query by Euclidean distance, ties
/// broken by ascending index. With `exclude_self`, query i skips base row i
/// (queries and base are the same set).
IntMatrix brute_force_knn(const FloatMatrix& base, const FloatMatrix& queries, int k, bool exclude_self = false);

struct VectorDataset {
  FloatMatrix base;
  FloatMatrix train;
  FloatMatrix query;
  IntMatrix groundtruth;  // neighbors of each query within base, nearest first
  std::vector<int> base_labels;
  std::vector<int> train_labels;
  std::vector<int> query_labels;

  void validate() const;
};

struct SynthParams {
  int clusters = 100;
  int points_per_cluster = 100;  // base rows per cluster
  int dim = 32;
  double noise = 0.1;            // per-coordinate standard deviation
  int train_count = 10000;
  int query_count = 1000;
  int groundtruth_k = 100;
  std::uint64_t seed = 1;
};

/// Gaussian clusters around unit-norm centers. Deterministic given the seed.
VectorDataset synth_dataset(const SynthParams& params);

}  // namespace hdt
