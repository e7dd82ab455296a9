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


#include "bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "error.hpp"
#include "parallel.hpp"

namespace hdt {
namespace {

constexpr Eigen::Index kEncodeChunk = 1024;

double percentile(std::vector<double> sorted, double p) {
  if (sorted.empty()) return 0.0;
  const auto idx = static_cast<std::size_t>(std::ceil(p * static_cast<double>(sorted.size())));
  return sorted[std::min(sorted.size() - 1, idx == 0 ? 0 : idx - 1)];
}

void check_input(const Hasher& h, const FloatMatrix& x) {
  if (x.cols() != h.input_dim()) {
    fail(ErrorCode::InvalidArgument, "input dimension " + std::to_string(x.cols()) + " does not match hasher (" +
                                         std::to_string(h.input_dim()) + ")");
  }
}

}  // namespace

void ModelHasher::encode(const FloatMatrix& x, std::vector<BinaryCode>& codes, FloatMatrix* embeddings) const {
  check_input(*this, x);
  codes.resize(static_cast<std::size_t>(x.rows()));
  if (embeddings) embeddings->resize(x.rows(), bits());
  for (Eigen::Index start = 0; start < x.rows(); start += kEncodeChunk) {
    const Eigen::Index rows = std::min(kEncodeChunk, x.rows() - start);
    const Matrix chunk = x.middleRows(start, rows).cast<double>();
    const EmbeddingBatch out = model_.forward(chunk, Mode::Infer);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const Vector y = out.logits().row(i);
      codes[start + i] = binarize(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
      if (embeddings) embeddings->row(start + i) = out.normalized().row(i).cast<float>();
    }
  }
}

RandomHyperplaneHasher::RandomHyperplaneHasher(int input_dim, int bits, std::uint64_t seed, std::vector<float> center) {
  require(input_dim >= 1 && bits >= 1 && bits <= kMaxCodeBits, "random hyperplane hasher: bad shape");
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal;
  projection_.resize(bits, input_dim);
  for (Eigen::Index i = 0; i < projection_.size(); ++i) projection_.data()[i] = normal(rng);
  center_ = Eigen::RowVectorXf::Zero(input_dim);
  if (!center.empty()) {
    require(static_cast<int>(center.size()) == input_dim, "random hyperplane hasher: center has wrong dimension");
    center_ = Eigen::Map<const Eigen::RowVectorXf>(center.data(), input_dim);
  }
}

void RandomHyperplaneHasher::encode(const FloatMatrix& x, std::vector<BinaryCode>& codes,
                                    FloatMatrix* embeddings) const {
  check_input(*this, x);
  codes.resize(static_cast<std::size_t>(x.rows()));
  if (embeddings) embeddings->resize(x.rows(), bits());
  const FloatMatrix y = (x.rowwise() - center_) * projection_.transpose();
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    codes[i] = binarize(std::span<const float>(y.row(i).data(), static_cast<std::size_t>(y.cols())));
    if (embeddings) {
      const float norm = y.row(i).norm();
      embeddings->row(i) = norm > 0 ? (y.row(i) / norm).eval() : y.row(i);
    }
  }
}

std::vector<float> column_mean(const FloatMatrix& x) {
  std::vector<float> mean(static_cast<std::size_t>(x.cols()), 0.0f);
  if (x.rows() == 0) return mean;
  const Eigen::RowVectorXd m = x.cast<double>().colwise().mean();
  for (Eigen::Index j = 0; j < x.cols(); ++j) mean[j] = static_cast<float>(m[j]);
  return mean;
}

RetrievalReport run_benchmark(const Hasher& hasher, const VectorDataset& data, const HdtConfig& cfg,
                              const BenchOptions& options, std::vector<std::vector<std::int64_t>>* results_out) {
  data.validate();
  if (cfg.n != hasher.bits()) {
    fail(ErrorCode::Config, "config n=" + std::to_string(cfg.n) + " but the hasher emits " +
                                std::to_string(hasher.bits()) + " bits");
  }
  if (cfg.r < 0 || cfg.r >= cfg.n) fail(ErrorCode::Config, "radius must satisfy 0 <= r < n");
  require(cfg.top_l >= 1, "top_l must be positive");
  require(options.recall_k >= 1, "recall_k must be positive");
  if (data.groundtruth.rows() != data.query.rows() || data.groundtruth.cols() < 1) {
    fail(ErrorCode::InvalidArgument, "benchmark needs ground truth for every query");
  }

  std::int64_t query_count = data.query.rows();
  if (options.max_queries > 0) query_count = std::min<std::int64_t>(query_count, options.max_queries);
  const FloatMatrix queries = data.query.topRows(query_count);

  RetrievalReport report;
  report.bits = cfg.n;
  report.radius = cfg.r;
  report.top_l = cfg.top_l;
  report.base_count = data.base.rows();
  report.query_count = query_count;
  report.recall_k = options.recall_k;
  report.map_k = options.map_k;
  report.expected_candidates = expected_candidates(cfg.n, cfg.r, static_cast<double>(data.base.rows()));

  const auto build_start = std::chrono::steady_clock::now();
  std::vector<BinaryCode> base_codes;
  FloatMatrix base_emb;
  hasher.encode(data.base, base_codes, &base_emb);
  MultiIndex index(cfg.n, cfg.r, hasher.embedding_dim());
  IndexRow row;
  for (std::size_t i = 0; i < base_codes.size(); ++i) {
    row.id = static_cast<std::int64_t>(i);
    row.code = base_codes[i];
    row.embedding.assign(base_emb.row(i).data(), base_emb.row(i).data() + base_emb.cols());
    index.insert(row);
  }
  report.index_build_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - build_start).count();

  std::vector<BinaryCode> query_codes;
  FloatMatrix query_emb;
  hasher.encode(queries, query_codes, &query_emb);

  std::vector<std::vector<std::int64_t>> results(static_cast<std::size_t>(query_count));
  report.per_query.resize(static_cast<std::size_t>(query_count));
  std::vector<double> latency(static_cast<std::size_t>(query_count));
  parallel_for(query_count, options.threads, [&](std::int64_t q) {
    const auto start = std::chrono::steady_clock::now();
    const std::span<const float> emb(query_emb.row(q).data(), static_cast<std::size_t>(query_emb.cols()));
    const LookupResult r = index.lookup_ranked(query_codes[q], emb, cfg.top_l);
    latency[q] = std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - start).count();
    report.per_query[q] = r.stats;
    auto& list = results[q];
    list.reserve(r.hits.size());
    for (const auto& hit : r.hits) list.push_back(hit.id);
  }, 16);

  // Deterministic reduction in query order.
  QueryStats total;
  for (const auto& s : report.per_query) {
    total += s;
    report.empty_queries += s.results_returned == 0 ? 1 : 0;
  }
  const double qn = std::max<double>(1.0, static_cast<double>(query_count));
  report.mean_candidates_fetched = static_cast<double>(total.candidates_fetched) / qn;
  report.mean_distance_comparisons = static_cast<double>(total.distance_comparisons) / qn;
  report.mean_embedding_comparisons = static_cast<double>(total.embedding_comparisons) / qn;
  report.mean_results_returned = static_cast<double>(total.results_returned) / qn;

  std::vector<std::int64_t> nearest(static_cast<std::size_t>(query_count));
  ResultLists relevant(static_cast<std::size_t>(query_count));
  const int relevant_k = std::min<int>(std::max(1, options.relevant_k), static_cast<int>(data.groundtruth.cols()));
  for (std::int64_t q = 0; q < query_count; ++q) {
    nearest[q] = data.groundtruth(q, 0);
    for (int j = 0; j < relevant_k; ++j) relevant[q].push_back(data.groundtruth(q, j));
  }
  report.recall = query_count ? recall_at_k(results, nearest, options.recall_k) : 0.0;

  if (options.map_k > 0 && query_count > 0) {
    std::vector<double> ap(static_cast<std::size_t>(query_count));
    parallel_for(query_count, options.threads, [&](std::int64_t q) {
      ap[q] = average_precision(rank_by_hamming(base_codes, query_codes[q], options.map_k), relevant[q], options.map_k);
    }, 8);
    double sum = 0;
    for (double v : ap) sum += v;
    report.map = sum / qn;
  }

  const int max_radius = std::min(cfg.n, options.pr_max_radius >= 0 ? options.pr_max_radius : cfg.r + 2);
  report.pr = pr_at_radius(base_codes, query_codes, relevant, max_radius);

  std::sort(latency.begin(), latency.end());
  double lsum = 0;
  for (double v : latency) lsum += v;
  report.latency = {lsum / qn, percentile(latency, 0.50), percentile(latency, 0.95), percentile(latency, 0.99),
                    latency.empty() ? 0.0 : latency.back()};
  if (results_out) *results_out = std::move(results);
  return report;
}

std::string format_report(const RetrievalReport& r, const std::string& label) {
  std::ostringstream out;
  out << std::fixed;
  out << "== " << label << " (n=" << r.bits << ", r=" << r.radius << ", l=" << r.top_l << ", base=" << r.base_count
      << ", queries=" << r.query_count << ")\n";
  out << std::setprecision(4);
  out << "  recall@" << r.recall_k << "            " << r.recall << '\n';
  if (r.map_k > 0) out << "  MAP@" << r.map_k << "              " << r.map << '\n';
  out << std::setprecision(2);
  out << "  candidates fetched      " << r.mean_candidates_fetched << "  (uniform-code model "
      << r.expected_candidates << ")\n";
  out << "  distance comparisons    " << r.mean_distance_comparisons << '\n';
  out << "  embedding comparisons   " << r.mean_embedding_comparisons << '\n';
  out << "  results returned        " << r.mean_results_returned << "  (empty queries " << r.empty_queries << ")\n";
  out << "  latency us              mean " << r.latency.mean_us << "  p50 " << r.latency.p50_us << "  p95 "
      << r.latency.p95_us << "  p99 " << r.latency.p99_us << "  max " << r.latency.max_us << '\n';
  out << "  radius  precision  recall  mean_results\n";
  out << std::setprecision(4);
  for (const auto& p : r.pr) {
    out << "  " << std::setw(6) << p.radius << "  " << std::setw(9) << p.precision << "  " << std::setw(6) << p.recall
        << "  " << std::setprecision(1) << p.mean_results << std::setprecision(4) << '\n';
  }
  return out.str();
}

std::string format_report_record(const RetrievalReport& r, const std::string& label) {
  std::ostringstream out;
  out << std::setprecision(10);
  out << "label=" << label << " n=" << r.bits << " r=" << r.radius << " l=" << r.top_l << " base=" << r.base_count
      << " queries=" << r.query_count << " recall_at_" << r.recall_k << '=' << r.recall;
  if (r.map_k > 0) out << " map_at_" << r.map_k << '=' << r.map;
  out << " candidates_fetched=" << r.mean_candidates_fetched << " distance_comparisons=" << r.mean_distance_comparisons
      << " embedding_comparisons=" << r.mean_embedding_comparisons << " results_returned=" << r.mean_results_returned
      << " expected_candidates=" << r.expected_candidates << " empty_queries=" << r.empty_queries
      << " latency_mean_us=" << r.latency.mean_us << " latency_p50_us=" << r.latency.p50_us
      << " latency_p95_us=" << r.latency.p95_us << " latency_p99_us=" << r.latency.p99_us;
  for (const auto& p : r.pr) {
    out << " precision_r" << p.radius << '=' << p.precision << " recall_r" << p.radius << '=' << p.recall;
  }
  out << '\n';
  return out.str();
}

std::string format_query_records(const RetrievalReport& r) {
  std::ostringstream out;
  for (std::size_t q = 0; q < r.per_query.size(); ++q) {
    const auto& s = r.per_query[q];
    out << "query=" << q << " candidates_fetched=" << s.candidates_fetched
        << " distance_comparisons=" << s.distance_comparisons << " embedding_comparisons=" << s.embedding_comparisons
        << " results_returned=" << s.results_returned << '\n';
  }
  return out.str();
}

}  // namespace hdt
