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

#include "model.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "binary_io.hpp"
#include "config.hpp"
#include "error.hpp"

namespace hdt {
namespace {

constexpr char kCheckpointMagic[] = "HDT-CHECKPOINT";
constexpr std::uint32_t kCheckpointVersion = 1;
constexpr std::uint32_t kPayloadMagic = 0x57544448;  // "HDTW"

void put_vector(std::ostream& out, const Vector& v) {
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) io::put<double>(out, v[i]);
}

Vector get_vector(std::istream& in, const char* what) {
  const auto size = io::get<std::uint32_t>(in, what);
  Vector v(size);
  for (std::uint32_t i = 0; i < size; ++i) v[i] = io::get<double>(in, what);
  return v;
}

}  // namespace

std::vector<std::span<double>> ModelGradients::blocks() {
  std::vector<std::span<double>> out;
  for (std::size_t k = 0; k < weight.size(); ++k) {
    out.emplace_back(weight[k].data(), static_cast<std::size_t>(weight[k].size()));
    if (gamma[k].size() > 0) {
      out.emplace_back(gamma[k].data(), static_cast<std::size_t>(gamma[k].size()));
      out.emplace_back(beta[k].data(), static_cast<std::size_t>(beta[k].size()));
    }
  }
  return out;
}

DenseNetModel::DenseNetModel(int input_dim, std::vector<int> widths, int bits, std::uint64_t seed)
    : input_dim_(input_dim), bits_(bits), widths_(std::move(widths)) {
  require(input_dim >= 1, "model input dimension must be positive");
  require(bits >= 1 && bits <= 256, "model output bits must be in [1, 256]");
  for (int w : widths_) require(w >= 1, "hidden widths must be positive");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  int in = input_dim;
  const int blocks = static_cast<int>(widths_.size()) + 1;
  for (int k = 0; k < blocks; ++k) {
    const bool hidden = k + 1 < blocks;
    const int out = hidden ? widths_[k] : bits;
    DenseLayer layer;
    layer.weight.resize(out, in);
    const double scale = std::sqrt(2.0 / in);
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = scale * normal(rng);
    if (hidden) {
      layer.gamma = Vector::Ones(out);
      layer.beta = Vector::Zero(out);
    }
    layer.running_mean = Vector::Zero(out);
    layer.running_var = Vector::Ones(out);
    layers_.push_back(std::move(layer));
    in += hidden ? out : 0;
  }
}

EmbeddingBatch DenseNetModel::forward(const Matrix& x, Mode mode, ForwardCache* cache) const {
  if (x.cols() != input_dim_) {
    fail(ErrorCode::InvalidArgument, "input dimension " + std::to_string(x.cols()) + " does not match model (" +
                                         std::to_string(input_dim_) + ")");
  }
  const Eigen::Index b = x.rows();
  require(b >= 1, "forward needs at least one row");
  if (mode == Mode::Train) require(b >= 2, "train-mode batch norm needs at least two rows");
  if (cache) {
    cache->layers.clear();
    cache->valid = false;
  }

  Matrix concat = x;
  Matrix logits;
  for (const auto& layer : layers_) {
    const Matrix pre = concat * layer.weight.transpose();
    Vector mean, var;
    if (mode == Mode::Train) {
      mean = pre.colwise().mean().transpose();
      var = (pre.rowwise() - mean.transpose()).array().square().colwise().mean().transpose();
    } else {
      mean = layer.running_mean;
      var = layer.running_var;
    }
    const Vector inv_std = (var.array() + kBatchNormEpsilon).rsqrt().matrix();
    Matrix xhat = (pre.rowwise() - mean.transpose()) * inv_std.asDiagonal();

    Matrix out;
    if (layer.hidden()) {
      out = ((xhat * layer.gamma.asDiagonal()).rowwise() + layer.beta.transpose()).cwiseMax(0.0);
    } else {
      out = xhat;
    }
    if (cache) cache->layers.push_back({concat, xhat, inv_std, mean, var, out});
    if (layer.hidden()) {
      Matrix next(b, concat.cols() + out.cols());
      next << concat, out;
      concat = std::move(next);
    } else {
      logits = std::move(out);
    }
  }
  if (cache) {
    cache->valid = mode == Mode::Train;
    cache->version = version_;
  }
  return EmbeddingBatch(std::move(logits));
}

ModelGradients DenseNetModel::backward(const ForwardCache& cache, const Matrix& grad_logits) const {
  if (!cache.valid || cache.version != version_ || cache.layers.size() != layers_.size()) {
    fail(ErrorCode::State, "backward needs a train-mode forward cache from the current weights");
  }
  const Eigen::Index b = grad_logits.rows();
  require(grad_logits.cols() == bits_ && b == cache.layers.back().xhat.rows(), "gradient shape mismatch");

  const int blocks = static_cast<int>(layers_.size());
  ModelGradients g;
  g.weight.resize(blocks);
  g.gamma.resize(blocks);
  g.beta.resize(blocks);

  // Upstream gradient for each hidden block's output.
  std::vector<Matrix> grad_out(blocks);
  for (int k = 0; k + 1 < blocks; ++k) grad_out[k] = Matrix::Zero(b, widths_[k]);
  grad_out[blocks - 1] = grad_logits;

  for (int k = blocks - 1; k >= 0; --k) {
    const auto& layer = layers_[k];
    const auto& c = cache.layers[k];
    Matrix grad_xhat;
    if (layer.hidden()) {
      const Matrix grad_act = grad_out[k].cwiseProduct((c.output.array() > 0.0).cast<double>().matrix());
      g.gamma[k] = grad_act.cwiseProduct(c.xhat).colwise().sum().transpose();
      g.beta[k] = grad_act.colwise().sum().transpose();
      grad_xhat = grad_act * layer.gamma.asDiagonal();
    } else {
      grad_xhat = grad_out[k];
    }
    // Batch-norm backward, column-wise.
    const Eigen::RowVectorXd sum_g = grad_xhat.colwise().sum();
    const Eigen::RowVectorXd sum_gx = grad_xhat.cwiseProduct(c.xhat).colwise().sum();
    const double inv_b = 1.0 / static_cast<double>(b);
    const Matrix grad_pre =
        ((grad_xhat.rowwise() - sum_g * inv_b) - c.xhat * (sum_gx * inv_b).asDiagonal()) * c.inv_std.asDiagonal();

    g.weight[k] = grad_pre.transpose() * c.input;
    const Matrix grad_in = grad_pre * layer.weight;
    Eigen::Index col = input_dim_;
    for (int j = 0; j < k; ++j) {
      grad_out[j] += grad_in.middleCols(col, widths_[j]);
      col += widths_[j];
    }
  }
  return g;
}

void DenseNetModel::sgd_step(ModelGradients& grads, double learning_rate, double lambda_w) {
  auto params = parameter_blocks();
  auto deltas = grads.blocks();
  require(params.size() == deltas.size(), "gradient does not match model structure");
  for (std::size_t i = 0; i < params.size(); ++i) {
    require(params[i].size() == deltas[i].size(), "gradient block size mismatch");
    for (std::size_t j = 0; j < params[i].size(); ++j) {
      params[i][j] -= learning_rate * (deltas[i][j] + 2.0 * lambda_w * params[i][j]);
    }
  }
  ++version_;
}

void DenseNetModel::update_running_stats(const ForwardCache& cache, double momentum) {
  require(cache.layers.size() == layers_.size(), "cache does not match model structure");
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& c = cache.layers[k];
    const double rows = static_cast<double>(c.xhat.rows());
    const Vector unbiased = c.var * (rows / std::max(rows - 1.0, 1.0));
    layers_[k].running_mean = momentum * layers_[k].running_mean + (1.0 - momentum) * c.mean;
    layers_[k].running_var = momentum * layers_[k].running_var + (1.0 - momentum) * unbiased;
  }
}

double DenseNetModel::weights_norm_sq() const {
  double total = 0.0;
  for (const auto& layer : layers_) {
    total += layer.weight.squaredNorm() + layer.gamma.squaredNorm() + layer.beta.squaredNorm();
  }
  return total;
}

std::vector<std::span<double>> DenseNetModel::parameter_blocks() {
  std::vector<std::span<double>> out;
  for (auto& layer : layers_) {
    out.emplace_back(layer.weight.data(), static_cast<std::size_t>(layer.weight.size()));
    if (layer.hidden()) {
      out.emplace_back(layer.gamma.data(), static_cast<std::size_t>(layer.gamma.size()));
      out.emplace_back(layer.beta.data(), static_cast<std::size_t>(layer.beta.size()));
    }
  }
  return out;
}

std::size_t DenseNetModel::parameter_count() const {
  std::size_t total = 0;
  for (const auto& layer : layers_) {
    total += static_cast<std::size_t>(layer.weight.size() + layer.gamma.size() + layer.beta.size());
  }
  return total;
}

// Checkpoint layout:
//   text header, one "key value" per line:
//     HDT-CHECKPOINT 1
//     input_dim <d>
//     widths <w1,w2,...>
//     bits <n>
//     cfg.<key> <value>        (every HdtConfig key)
//     end
//   binary payload, little-endian:
//     u32 magic "HDTW", u32 version, u32 block count
//     per block: u32 rows, u32 cols, f64 weight[rows*cols] (row-major),
//                vec gamma, vec beta, vec running_mean, vec running_var
//     where vec = u32 length followed by f64 values (length 0 when absent).
void DenseNetModel::save(std::ostream& out, const HdtConfig& cfg) const {
  RunConfig rc;
  rc.hdt = cfg;
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "input_dim " << input_dim_ << '\n';
  out << "widths ";
  for (std::size_t i = 0; i < widths_.size(); ++i) out << (i ? "," : "") << widths_[i];
  out << '\n' << "bits " << bits_ << '\n';
  for (const char* key : {"n", "r", "lambda", "lambda_w", "p0", "batch_size", "group_size", "top_l"}) {
    out << "cfg." << key << ' ' << rc.get(key) << '\n';
  }
  out << "end\n";

  io::put<std::uint32_t>(out, kPayloadMagic);
  io::put<std::uint32_t>(out, kCheckpointVersion);
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(layers_.size()));
  for (const auto& layer : layers_) {
    io::put<std::uint32_t>(out, static_cast<std::uint32_t>(layer.weight.rows()));
    io::put<std::uint32_t>(out, static_cast<std::uint32_t>(layer.weight.cols()));
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) io::put<double>(out, layer.weight.data()[i]);
    put_vector(out, layer.gamma);
    put_vector(out, layer.beta);
    put_vector(out, layer.running_mean);
    put_vector(out, layer.running_var);
  }
  if (!out) fail(ErrorCode::Io, "failed writing checkpoint");
}

DenseNetModel DenseNetModel::load(std::istream& in, HdtConfig* cfg) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::Format, "empty checkpoint");
  {
    std::istringstream head(line);
    std::string magic;
    std::uint32_t version = 0;
    head >> magic >> version;
    if (magic != kCheckpointMagic) fail(ErrorCode::Format, "not an HDT checkpoint");
    if (version != kCheckpointVersion) fail(ErrorCode::Format, "unsupported checkpoint version " + std::to_string(version));
  }
  DenseNetModel model;
  RunConfig rc;
  bool ended = false;
  while (std::getline(in, line)) {
    if (line == "end") {
      ended = true;
      break;
    }
    std::istringstream kv(line);
    std::string key, value;
    kv >> key >> value;
    if (key == "input_dim") {
      model.input_dim_ = std::stoi(value);
    } else if (key == "bits") {
      model.bits_ = std::stoi(value);
    } else if (key == "widths") {
      rc.set("widths", value);
      model.widths_ = rc.schedule.widths;
    } else if (key.rfind("cfg.", 0) == 0) {
      rc.set(key.substr(4), value);
    } else {
      fail(ErrorCode::Format, "unknown checkpoint header key '" + key + "'");
    }
  }
  if (!ended) fail(ErrorCode::Format, "checkpoint header is not terminated");

  if (io::get<std::uint32_t>(in, "payload magic") != kPayloadMagic) fail(ErrorCode::Format, "bad checkpoint payload");
  if (io::get<std::uint32_t>(in, "payload version") != kCheckpointVersion) {
    fail(ErrorCode::Format, "checkpoint payload version mismatch");
  }
  const auto blocks = io::get<std::uint32_t>(in, "block count");
  if (blocks != model.widths_.size() + 1) fail(ErrorCode::Format, "checkpoint block count does not match widths");
  int expected_in = model.input_dim_;
  for (std::uint32_t k = 0; k < blocks; ++k) {
    const bool hidden = k + 1 < blocks;
    const int expected_out = hidden ? model.widths_[k] : model.bits_;
    DenseLayer layer;
    const auto rows = io::get<std::uint32_t>(in, "weight rows");
    const auto cols = io::get<std::uint32_t>(in, "weight cols");
    if (static_cast<int>(rows) != expected_out || static_cast<int>(cols) != expected_in) {
      fail(ErrorCode::Format, "checkpoint block " + std::to_string(k) + " has unexpected shape");
    }
    layer.weight.resize(rows, cols);
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = io::get<double>(in, "weight");
    layer.gamma = get_vector(in, "gamma");
    layer.beta = get_vector(in, "beta");
    layer.running_mean = get_vector(in, "running mean");
    layer.running_var = get_vector(in, "running var");
    const Eigen::Index affine = hidden ? expected_out : 0;
    if (layer.gamma.size() != affine || layer.beta.size() != affine || layer.running_mean.size() != expected_out ||
        layer.running_var.size() != expected_out) {
      fail(ErrorCode::Format, "checkpoint block " + std::to_string(k) + " has inconsistent vectors");
    }
    model.layers_.push_back(std::move(layer));
    expected_in += hidden ? expected_out : 0;
  }
  if (cfg) *cfg = rc.hdt;
  return model;
}

void DenseNetModel::save(const std::string& path, const HdtConfig& cfg) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open " + path + " for writing");
  save(out, cfg);
}

DenseNetModel DenseNetModel::load(const std::string& path, HdtConfig* cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open checkpoint " + path);
  return load(in, cfg);
}

}  // namespace hdt
