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

// Central finite-difference check of the full model + loss gradient.

#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "hdt_loss.hpp"
#include "model.hpp"

namespace hdt::test {

struct GradientCheck {
  double max_rel_error_logits = 0;   // dJ/dY
  double max_rel_error_weights = 0;  // every learnable parameter
  std::size_t parameters = 0;
};

inline double rel_error(double analytic, double numeric) {
  const double scale = std::max({std::fabs(analytic), std::fabs(numeric), 1e-7});
  return std::fabs(analytic - numeric) / scale;
}

/// Tiny model (hidden widths {8, 8}, b = 6, n = 8, r = 1) with pairs
/// (0,1), (2,3), (4,5) similar.
inline GradientCheck check_tiny_model_gradient(std::uint64_t seed = 7, double h = 1e-6) {
  constexpr int kBatch = 6;
  constexpr int kInput = 5;
  HdtConfig cfg;
  cfg.n = 8;
  cfg.r = 1;
  cfg.lambda = 3.0;
  cfg.lambda_w = 1e-3;
  cfg.batch_size = kBatch;
  cfg.group_size = 2;

  DenseNetModel model(kInput, {8, 8}, cfg.n, seed);
  // Move BN affine parameters off their initial values so every path matters.
  std::mt19937_64 rng(seed + 1);
  std::normal_distribution<double> normal;
  for (auto block : model.parameter_blocks()) {
    for (auto& w : block) w += 0.1 * normal(rng);
  }
  Matrix x(kBatch, kInput);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  SimilarityMatrix s(kBatch);
  s.set_similar(0, 1);
  s.set_similar(2, 3);
  s.set_similar(4, 5);

  auto objective = [&](const DenseNetModel& m) {
    return hdt_loss(m.forward(x, Mode::Train), s, cfg, m.weights_norm_sq()).total;
  };

  GradientCheck out;
  ForwardCache cache;
  const EmbeddingBatch batch = model.forward(x, Mode::Train, &cache);
  const LossResult loss = hdt_loss(batch, s, cfg, model.weights_norm_sq());

  // dJ/dY against perturbing the logits directly.
  Matrix y = batch.logits();
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double saved = y.data()[i];
    y.data()[i] = saved + h;
    const double up = hdt_loss(EmbeddingBatch(y), s, cfg, model.weights_norm_sq()).total;
    y.data()[i] = saved - h;
    const double down = hdt_loss(EmbeddingBatch(y), s, cfg, model.weights_norm_sq()).total;
    y.data()[i] = saved;
    out.max_rel_error_logits =
        std::max(out.max_rel_error_logits, rel_error(loss.grad_logits.data()[i], (up - down) / (2 * h)));
  }

  ModelGradients grads = model.backward(cache, loss.grad_logits);
  auto analytic = grads.blocks();
  auto params = model.parameter_blocks();
  for (std::size_t b = 0; b < params.size(); ++b) {
    for (std::size_t j = 0; j < params[b].size(); ++j) {
      const double saved = params[b][j];
      params[b][j] = saved + h;
      const double up = objective(model);
      params[b][j] = saved - h;
      const double down = objective(model);
      params[b][j] = saved;
      // The weight-decay term is applied by sgd_step, so add it here.
      const double a = analytic[b][j] + 2.0 * cfg.lambda_w * saved;
      out.max_rel_error_weights = std::max(out.max_rel_error_weights, rel_error(a, (up - down) / (2 * h)));
      ++out.parameters;
    }
  }
  return out;
}

}  // namespace hdt::test
