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

#include "dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <random>

#include "binary_io.hpp"
#include "error.hpp"
#include "parallel.hpp"

namespace hdt {
namespace {

using DoubleMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct XvecsLayout {
  std::int64_t rows = 0;
  int dim = 0;
};

XvecsLayout open_xvecs(std::ifstream& in, const std::string& path, ElementKind kind) {
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  in.seekg(0, std::ios::end);
  const std::int64_t size = in.tellg();
  in.seekg(0, std::ios::beg);
  XvecsLayout layout;
  if (size == 0) return layout;
  layout.dim = io::get<std::int32_t>(in, "vector dimension");
  if (layout.dim <= 0) fail(ErrorCode::Format, path + ": nonpositive vector dimension");
  const std::int64_t record = 4 + static_cast<std::int64_t>(layout.dim) * element_size(kind);
  if (size % record != 0) {
    fail(ErrorCode::Format, path + ": size " + std::to_string(size) + " is not a multiple of the record size " +
                                std::to_string(record) + " (truncated file or inconsistent dimension)");
  }
  layout.rows = size / record;
  in.seekg(0, std::ios::beg);
  return layout;
}

template <typename Matrix, typename Element>
Matrix read_records(const std::string& path, ElementKind kind, std::int64_t max_rows) {
  std::ifstream in(path, std::ios::binary);
  const auto layout = open_xvecs(in, path, kind);
  std::int64_t rows = layout.rows;
  if (max_rows > 0) rows = std::min(rows, max_rows);
  Matrix m(rows, layout.dim);
  std::vector<Element> buffer(static_cast<std::size_t>(layout.dim));
  for (std::int64_t i = 0; i < rows; ++i) {
    const auto d = io::get<std::int32_t>(in, "vector dimension");
    if (d != layout.dim) {
      fail(ErrorCode::Format, path + ": record " + std::to_string(i) + " has dimension " + std::to_string(d) +
                                  ", expected " + std::to_string(layout.dim));
    }
    io::get_bytes(in, buffer.data(), buffer.size() * sizeof(Element), "vector elements");
    for (int j = 0; j < layout.dim; ++j) {
      m(i, j) = static_cast<typename Matrix::Scalar>(io::byteswap_if_big(buffer[j]));
    }
  }
  return m;
}

}  // namespace

std::size_t element_size(ElementKind kind) {
  switch (kind) {
    case ElementKind::Real32:
    case ElementKind::Int32:
      return 4;
    case ElementKind::Byte:
      return 1;
  }
  return 4;
}

FloatMatrix read_xvecs(const std::string& path, ElementKind kind, std::int64_t max_rows) {
  switch (kind) {
    case ElementKind::Real32:
      return read_records<FloatMatrix, float>(path, kind, max_rows);
    case ElementKind::Byte:
      return read_records<FloatMatrix, std::uint8_t>(path, kind, max_rows);
    case ElementKind::Int32:
      return read_records<FloatMatrix, std::int32_t>(path, kind, max_rows);
  }
  fail(ErrorCode::InvalidArgument, "unknown element kind");
}

IntMatrix read_ivecs(const std::string& path, std::int64_t max_rows) {
  return read_records<IntMatrix, std::int32_t>(path, ElementKind::Int32, max_rows);
}

void write_xvecs(const std::string& path, const FloatMatrix& m, ElementKind kind) {
  require(kind != ElementKind::Int32, "use write_ivecs for int32 data");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open " + path + " for writing");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    io::put<std::int32_t>(out, static_cast<std::int32_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (kind == ElementKind::Real32) {
        io::put<float>(out, m(i, j));
      } else {
        const float v = std::round(m(i, j));
        require(v >= 0.0f && v <= 255.0f, "bvecs values must lie in [0, 255]");
        io::put<std::uint8_t>(out, static_cast<std::uint8_t>(v));
      }
    }
  }
  if (!out) fail(ErrorCode::Io, "failed writing " + path);
}

void write_ivecs(const std::string& path, const IntMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open " + path + " for writing");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    io::put<std::int32_t>(out, static_cast<std::int32_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) io::put<std::int32_t>(out, m(i, j));
  }
  if (!out) fail(ErrorCode::Io, "failed writing " + path);
}

ElementKind kind_from_extension(const std::string& path) {
  auto ends_with = [&](const char* ext) {
    const std::string e(ext);
    return path.size() >= e.size() && path.compare(path.size() - e.size(), e.size(), e) == 0;
  };
  if (ends_with(".fvecs")) return ElementKind::Real32;
  if (ends_with(".bvecs")) return ElementKind::Byte;
  if (ends_with(".ivecs")) return ElementKind::Int32;
  fail(ErrorCode::InvalidArgument, "cannot infer element kind from extension of " + path);
}

IntMatrix brute_force_knn(const FloatMatrix& base, const FloatMatrix& queries, int k, bool exclude_self) {
  require(base.cols() == queries.cols(), "brute_force_knn: dimension mismatch");
  const std::int64_t available = base.rows() - (exclude_self ? 1 : 0);
  if (k < 1 || k > available) {
    fail(ErrorCode::InvalidArgument, "brute_force_knn: k=" + std::to_string(k) + " exceeds the " +
                                         std::to_string(available) + " available base vectors");
  }
  if (exclude_self) require(base.rows() == queries.rows(), "exclude_self needs queries to be the base set");

  constexpr Eigen::Index kQueryBlock = 64;
  constexpr Eigen::Index kBaseBlock = 2048;
  const Eigen::VectorXd base_norms = base.cast<double>().rowwise().squaredNorm();
  IntMatrix out(queries.rows(), k);
  const std::int64_t blocks = (queries.rows() + kQueryBlock - 1) / kQueryBlock;

  parallel_for(blocks, 0, [&](std::int64_t block) {
    const Eigen::Index q0 = block * kQueryBlock;
    const Eigen::Index qn = std::min(kQueryBlock, queries.rows() - q0);
    const DoubleMatrix q = queries.middleRows(q0, qn).cast<double>();
    const Eigen::VectorXd q_norms = q.rowwise().squaredNorm();
    using Entry = std::pair<double, std::int32_t>;
    std::vector<std::priority_queue<Entry>> heaps(static_cast<std::size_t>(qn));
    for (Eigen::Index b0 = 0; b0 < base.rows(); b0 += kBaseBlock) {
      const Eigen::Index bn = std::min(kBaseBlock, base.rows() - b0);
      const DoubleMatrix dots = q * base.middleRows(b0, bn).cast<double>().transpose();
      for (Eigen::Index i = 0; i < qn; ++i) {
        auto& heap = heaps[i];
        for (Eigen::Index j = 0; j < bn; ++j) {
          const auto idx = static_cast<std::int32_t>(b0 + j);
          if (exclude_self && idx == q0 + i) continue;
          const double d = std::max(0.0, q_norms[i] + base_norms[b0 + j] - 2.0 * dots(i, j));
          const Entry e{d, idx};
          if (static_cast<int>(heap.size()) < k) {
            heap.push(e);
          } else if (e < heap.top()) {
            heap.pop();
            heap.push(e);
          }
        }
      }
    }
    for (Eigen::Index i = 0; i < qn; ++i) {
      auto& heap = heaps[i];
      for (int slot = k - 1; slot >= 0; --slot) {
        out(q0 + i, slot) = heap.top().second;
        heap.pop();
      }
    }
  }, 1);
  return out;
}

void VectorDataset::validate() const {
  const auto dim = base.cols();
  if ((train.size() > 0 && train.cols() != dim) || (query.size() > 0 && query.cols() != dim)) {
    fail(ErrorCode::InvalidArgument, "dataset splits disagree on dimension");
  }
  for (Eigen::Index i = 0; i < groundtruth.size(); ++i) {
    const auto id = groundtruth.data()[i];
    if (id < 0 || id >= base.rows()) fail(ErrorCode::InvalidArgument, "ground truth indexes outside the base split");
  }
  if (groundtruth.size() > 0 && groundtruth.rows() != query.rows()) {
    fail(ErrorCode::InvalidArgument, "ground truth needs one row per query");
  }
}

VectorDataset synth_dataset(const SynthParams& p) {
  require(p.clusters >= 1 && p.points_per_cluster >= 1 && p.dim >= 1, "synth: sizes must be positive");
  require(p.noise >= 0, "synth: noise must be nonnegative");
  require(p.train_count >= 0 && p.query_count >= 0, "synth: split sizes must be nonnegative");

  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> pick(0, p.clusters - 1);

  FloatMatrix centers(p.clusters, p.dim);
  for (int c = 0; c < p.clusters; ++c) {
    double norm = 0;
    std::vector<double> v(p.dim);
    for (auto& x : v) {
      x = normal(rng);
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (int j = 0; j < p.dim; ++j) centers(c, j) = static_cast<float>(v[j] / norm);
  }
  auto draw = [&](FloatMatrix& m, Eigen::Index row, int cluster) {
    for (int j = 0; j < p.dim; ++j) m(row, j) = static_cast<float>(centers(cluster, j) + p.noise * normal(rng));
  };

  VectorDataset ds;
  ds.base.resize(static_cast<Eigen::Index>(p.clusters) * p.points_per_cluster, p.dim);
  for (int c = 0; c < p.clusters; ++c) {
    for (int i = 0; i < p.points_per_cluster; ++i) {
      const Eigen::Index row = static_cast<Eigen::Index>(c) * p.points_per_cluster + i;
      draw(ds.base, row, c);
      ds.base_labels.push_back(c);
    }
  }
  auto sample_split = [&](FloatMatrix& m, std::vector<int>& labels, int count) {
    m.resize(count, p.dim);
    for (int i = 0; i < count; ++i) {
      const int c = pick(rng);
      draw(m, i, c);
      labels.push_back(c);
    }
  };
  sample_split(ds.train, ds.train_labels, p.train_count);
  sample_split(ds.query, ds.query_labels, p.query_count);
  if (p.query_count > 0 && p.groundtruth_k > 0) {
    ds.groundtruth = brute_force_knn(ds.base, ds.query, std::min<int>(p.groundtruth_k, ds.base.rows()));
  }
  return ds;
}

}  // namespace hdt
