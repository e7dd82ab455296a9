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
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "stat_model.hpp"

namespace hdt {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Scalar hyperparameters shared by training, indexing and benchmarking.
struct HdtConfig {
  int n = 16;               // bits per hash
  int r = 0;                // Hamming distance target and lookup radius
  double lambda = 300.0;    // weight of the dissimilar-pair term
  double lambda_w = 1e-4;   // weight decay coefficient
  double p0 = kDefaultP0;   // log-likelihood extrapolation threshold
  int batch_size = 128;
  int group_size = 4;
  int top_l = 100;          // re-rank depth

  /// Throws ErrorCode::Config on any violated constraint.
  void validate() const;
};

/// Pre-binarized outputs Y and their L2-row-normalized form Z.
class EmbeddingBatch {
 public:
  EmbeddingBatch() = default;
  explicit EmbeddingBatch(Matrix logits);

  const Matrix& logits() const noexcept { return y_; }
  const Matrix& normalized() const noexcept { return z_; }
  const Vector& row_norms() const noexcept { return norms_; }
  Eigen::Index rows() const noexcept { return y_.rows(); }
  Eigen::Index bits() const noexcept { return y_.cols(); }

 private:
  Matrix y_;
  Matrix z_;
  Vector norms_;
};

/// Symmetric pairwise similarity over a batch.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  explicit SimilarityMatrix(int size);

  int size() const noexcept { return size_; }
  bool similar(int i, int j) const { return cells_[index(i, j)] != 0; }
  void set_similar(int i, int j, bool value = true);

  /// Unordered off-diagonal pair counts.
  std::int64_t similar_pairs() const;
  std::int64_t dissimilar_pairs() const;

 private:
  std::size_t index(int i, int j) const;

  int size_ = 0;
  std::vector<std::uint8_t> cells_;
};

/// P_ij = arccos(clamp(Z_i . Z_j)) / pi with a zero diagonal.
Matrix pairwise_probabilities(const Matrix& z);

struct LossResult {
  double total = 0;  // J = -J1 - lambda J2 + lambda_w J3
  double j1 = 0;
  double j2 = 0;
  double j3 = 0;
  std::int64_t similar_pairs = 0;
  std::int64_t dissimilar_pairs = 0;
  Matrix grad_logits;  // dJ/dY, excluding the weight-decay term
};

/// HDT pairwise loss over all unordered off-diagonal pairs of the batch.
/// J3 enters the value only; its gradient is the optimizer's weight decay.
LossResult hdt_loss(const EmbeddingBatch& batch, const SimilarityMatrix& s, const HdtConfig& cfg,
                    double weights_norm_sq);

enum class SimilarityRule { Label, Neighbors };

/// What the batch knows about each of its inputs.
struct BatchMeta {
  std::vector<std::int64_t> ids;
  std::vector<int> groups;                                    // group of each input
  std::optional<std::vector<int>> labels;                     // Label rule
  std::optional<std::vector<std::vector<std::int64_t>>> neighbors;  // Neighbors rule, by id
  bool groups_from_neighbor_seed = false;
};

/// S_ij = 1 iff the rule relates i and j in either direction, or both slots
/// hold the same input. Cross-group pairs are evaluated like any other.
SimilarityMatrix dynamic_similarity(const BatchMeta& meta, SimilarityRule rule);

}  // namespace hdt
