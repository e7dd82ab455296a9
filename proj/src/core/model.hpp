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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hdt_loss.hpp"

namespace hdt {

enum class Mode { Train, Infer };

/// One dense block: x -> W x -> batch norm -> (gamma, beta, relu) for hidden
/// blocks. The output block has no affine and no activation, so its batch
/// norm output is the logit matrix Y itself.
struct DenseLayer {
  Matrix weight;  // out x in
  Vector gamma;   // empty for the output block
  Vector beta;
  Vector running_mean;
  Vector running_var;

  bool hidden() const noexcept { return gamma.size() > 0; }
};

/// Activations retained by a training-mode forward pass.
struct ForwardCache {
  struct Layer {
    Matrix input;    // concatenated block input
    Matrix xhat;     // normalized pre-activation
    Vector inv_std;
    Vector mean;
    Vector var;      // biased batch variance
    Matrix output;   // block output after activation
  };
  std::vector<Layer> layers;
  std::uint64_t version = 0;
  bool valid = false;
};

struct ModelGradients {
  std::vector<Matrix> weight;
  std::vector<Vector> gamma;
  std::vector<Vector> beta;

  /// Same order as DenseNetModel::parameter_blocks.
  std::vector<std::span<double>> blocks();
};

/// Densely connected MLP: block k sees concat(x, h_1, ..., h_{k-1}).
class DenseNetModel {
 public:
  static constexpr double kBatchNormEpsilon = 1e-5;

  DenseNetModel() = default;
  DenseNetModel(int input_dim, std::vector<int> widths, int bits, std::uint64_t seed);

  int input_dim() const noexcept { return input_dim_; }
  int bits() const noexcept { return bits_; }
  const std::vector<int>& widths() const noexcept { return widths_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

  /// Train mode normalizes with batch statistics and fills `cache` when given;
  /// infer mode uses the running statistics.
  EmbeddingBatch forward(const Matrix& x, Mode mode, ForwardCache* cache = nullptr) const;

  /// Exact gradient of a scalar through the cached graph given dJ/dY.
  ModelGradients backward(const ForwardCache& cache, const Matrix& grad_logits) const;

  /// w <- w - lr (grad + 2 lambda_w w) on every learnable parameter.
  void sgd_step(ModelGradients& grads, double learning_rate, double lambda_w);

  /// Exponential moving average of batch statistics (unbiased variance).
  void update_running_stats(const ForwardCache& cache, double momentum);

  /// ||w||^2 over every learnable parameter.
  double weights_norm_sq() const;

  std::vector<std::span<double>> parameter_blocks();
  std::size_t parameter_count() const;

  void save(std::ostream& out, const HdtConfig& cfg) const;
  static DenseNetModel load(std::istream& in, HdtConfig* cfg = nullptr);
  void save(const std::string& path, const HdtConfig& cfg) const;
  static DenseNetModel load(const std::string& path, HdtConfig* cfg = nullptr);

 private:
  int input_dim_ = 0;
  int bits_ = 0;
  std::vector<int> widths_;
  std::vector<DenseLayer> layers_;
  std::uint64_t version_ = 1;
};

}  // namespace hdt
