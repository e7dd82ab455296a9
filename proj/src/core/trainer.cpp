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

#include "trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "error.hpp"

namespace hdt {

SimilaritySource knn_similarity(const FloatMatrix& inputs, int k) {
  const IntMatrix knn = brute_force_knn(inputs, inputs, k, /*exclude_self=*/true);
  SimilaritySource source;
  source.neighbors.resize(static_cast<std::size_t>(inputs.rows()));
  for (Eigen::Index i = 0; i < knn.rows(); ++i) {
    for (Eigen::Index j = 0; j < knn.cols(); ++j) {
      source.neighbors[i].push_back(knn(i, j));
      source.neighbors[knn(i, j)].push_back(i);
    }
  }
  for (auto& list : source.neighbors) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return source;
}

std::vector<std::int64_t> BatchPlan::ids() const {
  std::vector<std::int64_t> out;
  for (const auto& g : groups) {
    out.push_back(g.marker);
    out.insert(out.end(), g.members.begin(), g.members.end());
  }
  return out;
}

std::vector<int> BatchPlan::group_of_each() const {
  std::vector<int> out;
  for (std::size_t k = 0; k < groups.size(); ++k) out.insert(out.end(), 1 + groups[k].members.size(), static_cast<int>(k));
  return out;
}

BatchPlan sample_batch(const SimilaritySource& source, int group_size, int batch_size, std::mt19937_64& rng) {
  if (group_size < 2 || batch_size < group_size || batch_size % group_size != 0) {
    fail(ErrorCode::Config, "sample_batch: group size must be >= 2 and divide the batch size");
  }
  const auto count = static_cast<std::int64_t>(source.neighbors.size());
  require(count > 0, "sample_batch: empty training set");

  BatchPlan plan;
  std::uniform_int_distribution<std::int64_t> pick_marker(0, count - 1);
  const int groups = batch_size / group_size;
  const std::int64_t max_skips = 1000 + 100 * count;
  std::vector<std::size_t> order;
  while (static_cast<int>(plan.groups.size()) < groups) {
    const std::int64_t marker = pick_marker(rng);
    const auto& neighbors = source.neighbors[marker];
    if (neighbors.empty()) {
      if (++plan.skipped_markers > max_skips) {
        fail(ErrorCode::InvalidArgument, "sample_batch: no training input has similar neighbors");
      }
      continue;
    }
    BatchPlan::Group g;
    g.marker = marker;
    const std::size_t want = static_cast<std::size_t>(group_size - 1);
    if (neighbors.size() >= want) {
      order.resize(neighbors.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      for (std::size_t i = 0; i < want; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
        std::swap(order[i], order[pick(rng)]);
        g.members.push_back(neighbors[order[i]]);
      }
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, neighbors.size() - 1);
      for (std::size_t i = 0; i < want; ++i) g.members.push_back(neighbors[pick(rng)]);
    }
    plan.groups.push_back(std::move(g));
  }
  return plan;
}

BatchPlan sample_batch(const SimilaritySource& source, int group_size, int batch_size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_batch(source, group_size, batch_size, rng);
}

int planned_steps(const TrainSchedule& schedule, int batch_size, std::int64_t rows) {
  if (schedule.steps > 0) return schedule.steps;
  const std::int64_t per_epoch = std::max<std::int64_t>(1, (rows + batch_size - 1) / batch_size);
  return static_cast<int>(per_epoch * schedule.epochs);
}

TrainResult train(const FloatMatrix& inputs, const SimilaritySource& source, const HdtConfig& cfg,
                  const TrainSchedule& schedule, const TraceCallback& on_step) {
  cfg.validate();
  if (static_cast<std::size_t>(inputs.rows()) != source.neighbors.size()) {
    fail(ErrorCode::InvalidArgument, "train: need one neighbor list per training input");
  }
  for (const auto& list : source.neighbors) {
    for (auto id : list) {
      if (id < 0 || id >= inputs.rows()) fail(ErrorCode::InvalidArgument, "train: neighbor id out of range");
    }
  }

  TrainResult result;
  result.model = DenseNetModel(static_cast<int>(inputs.cols()), schedule.widths, cfg.n, schedule.seed);
  std::mt19937_64 rng(schedule.seed ^ 0x5bd1e995ULL);
  const int steps = planned_steps(schedule, cfg.batch_size, inputs.rows());
  const int decay_step = static_cast<int>(std::floor(schedule.decay_at * steps));

  BatchMeta meta;
  meta.neighbors.emplace();
  ForwardCache cache;
  Matrix x(cfg.batch_size, inputs.cols());
  for (int step = 0; step < steps; ++step) {
    const double lr = step < decay_step ? schedule.learning_rate : schedule.learning_rate * schedule.decay_factor;
    const BatchPlan plan = sample_batch(source, cfg.group_size, cfg.batch_size, rng);
    result.skipped_markers += plan.skipped_markers;

    meta.ids = plan.ids();
    meta.groups = plan.group_of_each();
    meta.neighbors->clear();
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(meta.ids.size()); ++i) {
      x.row(i) = inputs.row(meta.ids[i]).cast<double>();
      meta.neighbors->push_back(source.neighbors[meta.ids[i]]);
    }
    const SimilarityMatrix s = dynamic_similarity(meta, SimilarityRule::Neighbors);
    if (s.dissimilar_pairs() == 0) continue;  // every pair related: the loss is undefined

    const EmbeddingBatch batch = result.model.forward(x, Mode::Train, &cache);
    const LossResult loss = hdt_loss(batch, s, cfg, result.model.weights_norm_sq());
    if (!std::isfinite(loss.total) || !loss.grad_logits.allFinite()) {
      std::ostringstream msg;
      msg << "training diverged at step " << step << ": J=" << loss.total << " J1=" << loss.j1
          << " J2=" << loss.j2 << " J3=" << loss.j3 << " lr=" << lr;
      fail(ErrorCode::Diverged, msg.str());
    }
    ModelGradients grads = result.model.backward(cache, loss.grad_logits);
    result.model.sgd_step(grads, lr, cfg.lambda_w);
    if (!std::isfinite(result.model.weights_norm_sq())) {
      std::ostringstream msg;
      msg << "training diverged at step " << step << ": weights became non-finite (J=" << loss.total
          << " lr=" << lr << ")";
      fail(ErrorCode::Diverged, msg.str());
    }
    result.model.update_running_stats(cache, schedule.bn_momentum);

    TraceEntry entry{step, loss.total, loss.j1, loss.j2, loss.j3, lr};
    result.trace.push_back(entry);
    if (on_step) on_step(entry);
  }
  return result;
}

}  // namespace hdt
