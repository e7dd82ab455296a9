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

#include "hdt_loss.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <unordered_set>

#include "error.hpp"

namespace hdt {
namespace {

// Keeps d/dc arccos(c) finite next to |c| = 1.
constexpr double kArccosGuard = 1e-7;

void config_error(const std::string& what) { fail(ErrorCode::Config, "invalid config: " + what); }

}  // namespace

void HdtConfig::validate() const {
  if (n < 1 || n > 256) config_error("n must be in [1, 256]");
  if (r < 0 || r >= n) config_error("r must satisfy 0 <= r < n");
  if (!(lambda > 0)) config_error("lambda must be positive");
  if (!(lambda_w >= 0)) config_error("lambda_w must be nonnegative");
  if (!(p0 > 0 && p0 < 1)) config_error("p0 must lie in (0, 1)");
  if (group_size < 2) config_error("group_size must be at least 2");
  if (batch_size < group_size || batch_size % group_size != 0) {
    config_error("group_size must divide batch_size");
  }
  if (top_l < 1) config_error("top_l must be positive");
}

EmbeddingBatch::EmbeddingBatch(Matrix logits) : y_(std::move(logits)) {
  norms_ = y_.rowwise().norm();
  for (Eigen::Index i = 0; i < norms_.size(); ++i) {
    if (!(norms_[i] > 0) || !std::isfinite(norms_[i])) {
      fail(ErrorCode::InvalidArgument, "embedding row " + std::to_string(i) + " has zero or non-finite norm");
    }
  }
  z_ = norms_.cwiseInverse().asDiagonal() * y_;
}

SimilarityMatrix::SimilarityMatrix(int size)
    : size_(size), cells_(static_cast<std::size_t>(size) * static_cast<std::size_t>(size), 0) {
  require(size >= 0, "similarity matrix size must be nonnegative");
}

std::size_t SimilarityMatrix::index(int i, int j) const {
  require(i >= 0 && j >= 0 && i < size_ && j < size_, "similarity index out of range");
  return static_cast<std::size_t>(i) * size_ + j;
}

void SimilarityMatrix::set_similar(int i, int j, bool value) {
  cells_[index(i, j)] = value;
  cells_[index(j, i)] = value;
}

std::int64_t SimilarityMatrix::similar_pairs() const {
  std::int64_t count = 0;
  for (int i = 0; i < size_; ++i) {
    for (int j = i + 1; j < size_; ++j) count += similar(i, j);
  }
  return count;
}

std::int64_t SimilarityMatrix::dissimilar_pairs() const {
  const std::int64_t pairs = static_cast<std::int64_t>(size_) * (size_ - 1) / 2;
  return pairs - similar_pairs();
}

Matrix pairwise_probabilities(const Matrix& z) {
  const Matrix gram = z * z.transpose();
  Matrix p(z.rows(), z.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    p(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < z.rows(); ++j) {
      const double v = std::acos(std::clamp(gram(i, j), -1.0, 1.0)) / std::numbers::pi;
      p(i, j) = v;
      p(j, i) = v;
    }
  }
  return p;
}

LossResult hdt_loss(const EmbeddingBatch& batch, const SimilarityMatrix& s, const HdtConfig& cfg,
                    double weights_norm_sq) {
  cfg.validate();
  const int b = static_cast<int>(batch.rows());
  require(s.size() == b, "similarity matrix size does not match the batch");
  require(batch.bits() == cfg.n, "embedding width does not match n");

  LossResult out;
  out.similar_pairs = s.similar_pairs();
  out.dissimilar_pairs = s.dissimilar_pairs();
  if (out.similar_pairs == 0 || out.dissimilar_pairs == 0) {
    fail(ErrorCode::InvalidArgument,
         "batch needs at least one similar and one dissimilar pair (similar=" +
             std::to_string(out.similar_pairs) + ", dissimilar=" + std::to_string(out.dissimilar_pairs) + ")");
  }

  const Matrix& z = batch.normalized();
  const Matrix gram = z * z.transpose();
  // Similar pairs: log Pr[d <= r] at agreement 1 - P.
  // Dissimilar pairs: log Pr[d >= r + 1] = log Pr[agreements <= n - r - 1] at agreement P.
  const LogWithinRadius within(cfg.r, cfg.n, cfg.p0);
  const LogWithinRadius beyond(cfg.n - cfg.r - 1, cfg.n, cfg.p0);
  const double w_sim = 1.0 / static_cast<double>(out.similar_pairs);
  const double w_dis = cfg.lambda / static_cast<double>(out.dissimilar_pairs);

  Matrix grad_z = Matrix::Zero(b, z.cols());
  double sum_sim = 0.0, sum_dis = 0.0;
  for (int i = 0; i < b; ++i) {
    for (int j = i + 1; j < b; ++j) {
      const double raw = gram(i, j);
      const double c = std::clamp(raw, -1.0, 1.0);
      const double p = std::acos(c) / std::numbers::pi;
      double dj_dp;
      if (s.similar(i, j)) {
        const auto v = within(1.0 - p);
        sum_sim += v.value;
        dj_dp = w_sim * v.slope;  // d(-J1)/dP
      } else {
        const auto v = beyond(p);
        sum_dis += v.value;
        dj_dp = -w_dis * v.slope;  // d(-lambda J2)/dP
      }
      if (std::fabs(raw) >= 1.0) continue;  // clamp subgradient
      const double dp_dc = -1.0 / (std::numbers::pi * std::sqrt(std::max(1.0 - c * c, kArccosGuard)));
      const double g = dj_dp * dp_dc;
      grad_z.row(i) += g * z.row(j);
      grad_z.row(j) += g * z.row(i);
    }
  }
  out.j1 = sum_sim * w_sim;
  out.j2 = sum_dis / static_cast<double>(out.dissimilar_pairs);
  out.j3 = weights_norm_sq;
  out.total = -out.j1 - cfg.lambda * out.j2 + cfg.lambda_w * out.j3;

  // Back through z = y / |y|: project out the radial component.
  out.grad_logits.resize(b, z.cols());
  for (int i = 0; i < b; ++i) {
    const double radial = grad_z.row(i).dot(z.row(i));
    out.grad_logits.row(i) = (grad_z.row(i) - radial * z.row(i)) / batch.row_norms()[i];
  }
  return out;
}

SimilarityMatrix dynamic_similarity(const BatchMeta& meta, SimilarityRule rule) {
  const int b = static_cast<int>(meta.ids.size());
  SimilarityMatrix s(b);
  for (int i = 0; i < b; ++i) {
    for (int j = i + 1; j < b; ++j) {
      if (meta.ids[i] == meta.ids[j]) s.set_similar(i, j);
    }
  }

  if (rule == SimilarityRule::Label) {
    if (!meta.labels || static_cast<int>(meta.labels->size()) != b) {
      fail(ErrorCode::InvalidArgument, "label similarity requires one label per input");
    }
    const auto& labels = *meta.labels;
    for (int i = 0; i < b; ++i) {
      for (int j = i + 1; j < b; ++j) {
        if (labels[i] == labels[j]) s.set_similar(i, j);
      }
    }
    return s;
  }

  if (!meta.neighbors || static_cast<int>(meta.neighbors->size()) != b) {
    fail(ErrorCode::InvalidArgument, "neighbor similarity requires one neighbor list per input");
  }
  const auto& lists = *meta.neighbors;
  bool any = false;
  for (const auto& l : lists) any = any || !l.empty();
  if (!any) {
    if (!meta.groups_from_neighbor_seed || static_cast<int>(meta.groups.size()) != b) {
      fail(ErrorCode::InvalidArgument, "all neighbor lists are empty and groups carry no neighbor seed");
    }
    for (int i = 0; i < b; ++i) {
      for (int j = i + 1; j < b; ++j) {
        if (meta.groups[i] == meta.groups[j]) s.set_similar(i, j);
      }
    }
    return s;
  }

  std::vector<std::unordered_set<std::int64_t>> sets(b);
  for (int i = 0; i < b; ++i) sets[i].insert(lists[i].begin(), lists[i].end());
  for (int i = 0; i < b; ++i) {
    for (int j = i + 1; j < b; ++j) {
      if (sets[i].contains(meta.ids[j]) || sets[j].contains(meta.ids[i])) s.set_similar(i, j);
    }
  }
  return s;
}

}  // namespace hdt
