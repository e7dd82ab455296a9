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
#include <memory>
#include <string>
#include <vector>

#include "config.hpp"
#include "dataset.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "multi_index.hpp"

namespace hdt {

/// Maps real vectors to binary codes plus a real embedding for re-ranking.
class Hasher {
 public:
  virtual ~Hasher() = default;
  virtual int input_dim() const = 0;
  virtual int bits() const = 0;
  virtual int embedding_dim() const = 0;
  /// Fills one code per row and, when `embeddings` is given, one embedding row per input.
  virtual void encode(const FloatMatrix& x, std::vector<BinaryCode>& codes, FloatMatrix* embeddings) const = 0;
};

/// Codes are the signs of the inference-mode logits; the embedding is the
/// row-normalized logit vector.
class ModelHasher final : public Hasher {
 public:
  explicit ModelHasher(DenseNetModel model) : model_(std::move(model)) {}
  int input_dim() const override { return model_.input_dim(); }
  int bits() const override { return model_.bits(); }
  int embedding_dim() const override { return model_.bits(); }
  void encode(const FloatMatrix& x, std::vector<BinaryCode>& codes, FloatMatrix* embeddings) const override;
  const DenseNetModel& model() const noexcept { return model_; }

 private:
  DenseNetModel model_;
};

/// Random-hyperplane baseline: signs of Gaussian projections of centered
/// inputs; the embedding is the normalized projection.
class RandomHyperplaneHasher final : public Hasher {
 public:
  /// `center` is subtracted before projecting; pass the training mean.
  RandomHyperplaneHasher(int input_dim, int bits, std::uint64_t seed, std::vector<float> center = {});
  int input_dim() const override { return static_cast<int>(projection_.cols()); }
  int bits() const override { return static_cast<int>(projection_.rows()); }
  int embedding_dim() const override { return bits(); }
  void encode(const FloatMatrix& x, std::vector<BinaryCode>& codes, FloatMatrix* embeddings) const override;

 private:
  FloatMatrix projection_;  // bits x input_dim
  Eigen::RowVectorXf center_;
};

std::vector<float> column_mean(const FloatMatrix& x);

struct LatencySummary {
  double mean_us = 0;
  double p50_us = 0;
  double p95_us = 0;
  double p99_us = 0;
  double max_us = 0;
};

struct RetrievalReport {
  int bits = 0;
  int radius = 0;
  int top_l = 0;
  std::int64_t base_count = 0;
  std::int64_t query_count = 0;

  int recall_k = 0;
  double recall = 0;
  int map_k = 0;
  double map = 0;  // over the full base ranked by Hamming distance; 0 when map_k = 0

  double mean_candidates_fetched = 0;
  double mean_distance_comparisons = 0;
  double mean_embedding_comparisons = 0;
  double mean_results_returned = 0;
  double expected_candidates = 0;  // uniform-code cost model
  std::int64_t empty_queries = 0;

  LatencySummary latency;
  std::vector<RadiusPoint> pr;
  std::vector<QueryStats> per_query;
  double index_build_seconds = 0;
};

/// Hashes the base split into an HDT-E index, runs every query through
/// lookup_ranked with l = cfg.top_l, and scores the result lists.
/// Needs ground truth (nearest neighbor first) for the query split.
RetrievalReport run_benchmark(const Hasher& hasher, const VectorDataset& data, const HdtConfig& cfg,
                              const BenchOptions& options, std::vector<std::vector<std::int64_t>>* results = nullptr);

/// Aligned table for people.
std::string format_report(const RetrievalReport& report, const std::string& label);
/// One `key=value` line for the configuration.
std::string format_report_record(const RetrievalReport& report, const std::string& label);
/// One `key=value` line per query.
std::string format_query_records(const RetrievalReport& report);

}  // namespace hdt
