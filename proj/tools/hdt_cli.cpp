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


// Command-line front end. Talks to the library only through hdt/hdt.h.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hdt/hdt.h"

namespace {

/// Thrown after printing a library failure; main turns it into exit code 1.
struct Failed {
  hdt_status status;
};

void check(hdt_status s, const std::string& what) {
  if (s == HDT_OK) return;
  std::cerr << "error: " << what << ": " << hdt_status_name(s) << ": " << hdt_last_error() << '\n';
  throw Failed{s};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Matrix = std::unique_ptr<hdt_matrix, Deleter<hdt_matrix, hdt_matrix_free>>;
using Neighbors = std::unique_ptr<hdt_neighbors, Deleter<hdt_neighbors, hdt_neighbors_free>>;
using Config = std::unique_ptr<hdt_config, Deleter<hdt_config, hdt_config_free>>;
using Model = std::unique_ptr<hdt_model, Deleter<hdt_model, hdt_model_free>>;
using Codes = std::unique_ptr<hdt_codes, Deleter<hdt_codes, hdt_codes_free>>;
using Index = std::unique_ptr<hdt_index, Deleter<hdt_index, hdt_index_free>>;
using Result = std::unique_ptr<hdt_result, Deleter<hdt_result, hdt_result_free>>;
using Report = std::unique_ptr<hdt_report, Deleter<hdt_report, hdt_report_free>>;

std::string take_string(char* s) {
  std::string out(s ? s : "");
  hdt_string_free(s);
  return out;
}

Config new_config() {
  hdt_config* c = nullptr;
  check(hdt_config_create(&c), "creating config");
  return Config(c);
}

Matrix read_matrix(const std::string& path, int64_t max_rows = 0) {
  hdt_matrix* m = nullptr;
  check(hdt_matrix_read(path.c_str(), max_rows, &m), "reading " + path);
  return Matrix(m);
}

Neighbors read_neighbors(const std::string& path) {
  hdt_neighbors* n = nullptr;
  check(hdt_neighbors_read(path.c_str(), &n), "reading " + path);
  return Neighbors(n);
}

Codes read_codes(const std::string& path) {
  hdt_codes* c = nullptr;
  check(hdt_codes_read(path.c_str(), &c), "reading " + path);
  return Codes(c);
}

/// --config file, then --set overrides, then --seed.
struct ConfigFlags {
  std::string file;
  std::vector<std::string> sets;
  uint64_t seed = 0;

  void add(CLI::App* app, bool with_seed) {
    app->add_option("--config", file, "key = value config file")->check(CLI::ExistingFile);
    app->add_option("--set", sets, "override one key (key=value); repeatable");
    if (with_seed) app->add_option("--seed", seed, "random seed (config key seed)");
  }

  void apply(CLI::App* app, hdt_config* c) const {
    if (!file.empty()) check(hdt_config_load_file(c, file.c_str()), "loading " + file);
    for (const auto& s : sets) check(hdt_config_assign(c, s.c_str()), "--set " + s);
    if (app->count("--seed") > 0) check(hdt_config_set(c, "seed", std::to_string(seed).c_str()), "--seed");
  }

};

std::string config_value(const hdt_config* cfg, const char* key) {
  char* v = nullptr;
  check(hdt_config_get(cfg, key, &v), std::string("reading config key ") + key);
  return take_string(v);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) {
    std::cerr << "error: cannot open " << path << " for writing\n";
    throw Failed{HDT_ERR_IO};
  }
  out << text;
}

void train_progress(const hdt_train_step* s, void* user) {
  const int every = *static_cast<const int*>(user);
  if (every > 0 && (s->step % every == 0 || s->step + 1 == s->total_steps)) {
    std::printf("step %6d/%d  J %.5f  J1 %.5f  J2 %.5f  J3 %.3f  lr %.2g\n", s->step + 1, s->total_steps, s->loss,
                s->j1, s->j2, s->j3, s->learning_rate);
    std::fflush(stdout);
  }
}

Model baseline_model(int32_t dim, int32_t bits, uint64_t seed, const std::string& center_path) {
  Matrix center;
  if (!center_path.empty()) {
    const Matrix data = read_matrix(center_path);
    std::vector<double> mean(static_cast<std::size_t>(hdt_matrix_cols(data.get())), 0.0);
    const float* p = hdt_matrix_data(data.get());
    const int64_t rows = hdt_matrix_rows(data.get());
    for (int64_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += p[i * static_cast<int64_t>(mean.size()) + j];
    }
    std::vector<float> m(mean.size());
    for (std::size_t j = 0; j < mean.size(); ++j) m[j] = static_cast<float>(mean[j] / std::max<int64_t>(1, rows));
    hdt_matrix* c = nullptr;
    check(hdt_matrix_create(1, static_cast<int32_t>(m.size()), m.data(), &c), "building center");
    center.reset(c);
  }
  hdt_model* model = nullptr;
  check(hdt_model_random_hyperplane(dim, bits, seed, center.get(), &model), "building random-hyperplane hasher");
  return Model(model);
}

void print_result(int64_t query, const hdt_result* r, bool ranked) {
  hdt_query_stats s;
  hdt_result_stats(r, &s);
  std::printf("query=%lld results=%lld candidates_fetched=%lld distance_comparisons=%lld embedding_comparisons=%lld\n",
              static_cast<long long>(query), static_cast<long long>(s.results_returned),
              static_cast<long long>(s.candidates_fetched), static_cast<long long>(s.distance_comparisons),
              static_cast<long long>(s.embedding_comparisons));
  for (int64_t i = 0; i < hdt_result_count(r); ++i) {
    if (ranked) {
      std::printf("  id=%lld hamming=%d distance=%.6g\n", static_cast<long long>(hdt_result_id(r, i)),
                  hdt_result_hamming(r, i), hdt_result_distance(r, i));
    } else {
      std::printf("  id=%lld hamming=%d\n", static_cast<long long>(hdt_result_id(r, i)), hdt_result_hamming(r, i));
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hamming distance target hashing: training, multi-index search and retrieval benchmarks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hdt_version()));

  // synth
  auto* synth = app.add_subcommand("synth", "generate a clustered dataset (base, train, query, ground truth)");
  hdt_synth_params sp;
  hdt_synth_defaults(&sp);
  std::string synth_dir;
  synth->add_option("--out-dir", synth_dir, "output directory")->required();
  synth->add_option("--clusters", sp.clusters, "cluster count")->capture_default_str();
  synth->add_option("--points-per-cluster", sp.points_per_cluster, "base rows per cluster")->capture_default_str();
  synth->add_option("--dim", sp.dim, "dimension")->capture_default_str();
  synth->add_option("--noise", sp.noise, "per-coordinate noise standard deviation")->capture_default_str();
  synth->add_option("--train", sp.train_count, "training rows")->capture_default_str();
  synth->add_option("--queries", sp.query_count, "query rows")->capture_default_str();
  synth->add_option("--gt-k", sp.groundtruth_k, "ground-truth neighbors per query")->capture_default_str();
  synth->add_option("--seed", sp.seed, "random seed")->capture_default_str();

  // ground-truth
  auto* gt = app.add_subcommand("ground-truth", "exact k nearest neighbors of queries within a base set");
  std::string gt_base, gt_query, gt_out;
  int32_t gt_k = 100;
  gt->add_option("--base", gt_base, "base vectors (.fvecs/.bvecs)")->required()->check(CLI::ExistingFile);
  gt->add_option("--query", gt_query, "query vectors")->required()->check(CLI::ExistingFile);
  gt->add_option("--k", gt_k, "neighbors per query")->capture_default_str();
  gt->add_option("--out", gt_out, "output .ivecs")->required();

  // train
  auto* tr = app.add_subcommand("train", "train a hash model on a vector file");
  ConfigFlags tr_flags;
  std::string tr_input, tr_out;
  int64_t tr_max_rows = 0;
  tr->add_option("--input", tr_input, "training vectors")->required()->check(CLI::ExistingFile);
  tr->add_option("--max-rows", tr_max_rows, "read at most this many rows");
  tr->add_option("--out", tr_out, "checkpoint path")->required();
  tr_flags.add(tr, true);

  // hash
  auto* hs = app.add_subcommand("hash", "hash vectors into a codes file");
  std::string hs_model, hs_input, hs_out, hs_center;
  int32_t hs_bits = 0;
  uint64_t hs_seed = 1;
  hs->add_option("--model", hs_model, "checkpoint")->check(CLI::ExistingFile);
  hs->add_option("--random-hyperplane", hs_bits, "use a random-hyperplane hasher with this many bits instead");
  hs->add_option("--center-from", hs_center, "vectors whose mean centers the random hyperplanes");
  hs->add_option("--seed", hs_seed, "seed for the random-hyperplane hasher")->capture_default_str();
  hs->add_option("--input", hs_input, "vectors to hash")->required()->check(CLI::ExistingFile);
  hs->add_option("--out", hs_out, "codes file")->required();

  // index
  auto* ix = app.add_subcommand("index", "build a multi-index snapshot from a codes file");
  std::string ix_codes, ix_out;
  int32_t ix_radius = 0;
  bool ix_no_embeddings = false;
  ix->add_option("--codes", ix_codes, "codes file")->required()->check(CLI::ExistingFile);
  ix->add_option("--radius,-r", ix_radius, "Hamming radius r (r + 1 substrings)")->required();
  ix->add_flag("--no-embeddings", ix_no_embeddings, "do not store embeddings (no re-ranking)");
  ix->add_option("--out", ix_out, "snapshot path")->required();

  // query
  auto* qy = app.add_subcommand("query", "look up codes in an index snapshot");
  std::string qy_index, qy_codes, qy_code;
  int32_t qy_rank = 0;
  int64_t qy_limit = 0;
  qy->add_option("--index", qy_index, "snapshot")->required()->check(CLI::ExistingFile);
  auto* qy_codes_opt = qy->add_option("--codes", qy_codes, "codes file of queries")->check(CLI::ExistingFile);
  qy->add_option("--code", qy_code, "one literal code of 0/1 characters")->excludes(qy_codes_opt);
  qy->add_option("--rank", qy_rank, "re-rank by embedding and keep this many (needs --codes with embeddings)");
  qy->add_option("--limit", qy_limit, "answer only the first N queries");

  // bench
  auto* bn = app.add_subcommand("bench", "index the base split and score queries against ground truth");
  ConfigFlags bn_flags;
  std::string bn_model, bn_base, bn_query, bn_gt, bn_records, bn_per_query, bn_label = "run";
  int32_t bn_baseline_bits = 0;
  bn->add_option("--model", bn_model, "checkpoint")->check(CLI::ExistingFile);
  bn->add_option("--baseline", bn_baseline_bits, "benchmark a random-hyperplane hasher with this many bits instead");
  bn->add_option("--base", bn_base, "base vectors")->required()->check(CLI::ExistingFile);
  bn->add_option("--query", bn_query, "query vectors")->required()->check(CLI::ExistingFile);
  bn->add_option("--groundtruth", bn_gt, "ground truth .ivecs (nearest first)")->required()->check(CLI::ExistingFile);
  bn->add_option("--label", bn_label, "name used in reports")->capture_default_str();
  bn->add_option("--records", bn_records, "append the key=value record to this file");
  bn->add_option("--per-query", bn_per_query, "write per-query key=value stats to this file");
  bn_flags.add(bn, true);

  // simulate-distribution
  auto* sim = app.add_subcommand("simulate-distribution",
                                 "Hamming distances of sign codes for vector pairs at a fixed angle");
  int32_t sim_n = 64;
  double sim_theta = 15.0;
  int64_t sim_trials = 1000000;
  uint64_t sim_seed = 1;
  sim->add_option("--n", sim_n, "code length")->capture_default_str();
  sim->add_option("--theta", sim_theta, "angle in degrees")->capture_default_str();
  sim->add_option("--trials", sim_trials, "vector pairs")->capture_default_str();
  sim->add_option("--seed", sim_seed, "random seed")->capture_default_str();

  // advise
  auto* ad = app.add_subcommand("advise", "choose a radius for n bits and N rows, with the cost model");
  int32_t ad_n = 64;
  double ad_count = 1e6;
  ad->add_option("--n", ad_n, "code length")->capture_default_str();
  ad->add_option("--count,-N", ad_count, "indexed rows")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      hdt_matrix *b = nullptr, *t = nullptr, *q = nullptr;
      hdt_neighbors* g = nullptr;
      check(hdt_synth(&sp, &b, &t, &q, &g), "synth");
      Matrix base(b), train(t), query(q);
      Neighbors truth(g);
      const std::string dir = synth_dir + "/";
      check(hdt_matrix_write(base.get(), (dir + "base.fvecs").c_str()), "writing base.fvecs");
      check(hdt_matrix_write(train.get(), (dir + "train.fvecs").c_str()), "writing train.fvecs");
      check(hdt_matrix_write(query.get(), (dir + "query.fvecs").c_str()), "writing query.fvecs");
      if (hdt_neighbors_rows(truth.get()) > 0) {
        check(hdt_neighbors_write(truth.get(), (dir + "groundtruth.ivecs").c_str()), "writing groundtruth.ivecs");
      }
      std::printf("wrote %lld base, %lld train, %lld query rows of dimension %d to %s\n",
                  static_cast<long long>(hdt_matrix_rows(base.get())), static_cast<long long>(hdt_matrix_rows(train.get())),
                  static_cast<long long>(hdt_matrix_rows(query.get())), hdt_matrix_cols(base.get()), synth_dir.c_str());
    } else if (*gt) {
      const Matrix base = read_matrix(gt_base);
      const Matrix query = read_matrix(gt_query);
      hdt_neighbors* n = nullptr;
      check(hdt_knn(base.get(), query.get(), gt_k, 0, 0, &n), "ground truth");
      const Neighbors truth(n);
      check(hdt_neighbors_write(truth.get(), gt_out.c_str()), "writing " + gt_out);
      std::printf("wrote %lld x %d neighbors to %s\n", static_cast<long long>(hdt_neighbors_rows(truth.get())),
                  hdt_neighbors_cols(truth.get()), gt_out.c_str());
    } else if (*tr) {
      const Config cfg = new_config();
      tr_flags.apply(tr, cfg.get());
      check(hdt_config_validate(cfg.get()), "config");
      const Matrix input = read_matrix(tr_input, tr_max_rows);
      int every = std::stoi(config_value(cfg.get(), "log_every"));
      hdt_model* m = nullptr;
      check(hdt_train(input.get(), cfg.get(), train_progress, &every, &m), "training");
      const Model model(m);
      check(hdt_model_save(model.get(), cfg.get(), tr_out.c_str()), "saving " + tr_out);
      std::printf("saved %d-bit model to %s\n", hdt_model_bits(model.get()), tr_out.c_str());
    } else if (*hs) {
      const Matrix input = read_matrix(hs_input);
      Model model;
      if (hs_bits > 0) {
        model = baseline_model(hdt_matrix_cols(input.get()), hs_bits, hs_seed, hs_center);
      } else if (!hs_model.empty()) {
        hdt_model* m = nullptr;
        check(hdt_model_load(hs_model.c_str(), nullptr, &m), "loading " + hs_model);
        model.reset(m);
      } else {
        std::cerr << "error: hash needs --model or --random-hyperplane\n";
        return 2;
      }
      hdt_codes* c = nullptr;
      check(hdt_hash(model.get(), input.get(), &c), "hashing");
      const Codes codes(c);
      check(hdt_codes_write(codes.get(), hs_out.c_str()), "writing " + hs_out);
      std::printf("wrote %lld %d-bit codes to %s\n", static_cast<long long>(hdt_codes_count(codes.get())),
                  hdt_codes_bits(codes.get()), hs_out.c_str());
    } else if (*ix) {
      const Codes codes = read_codes(ix_codes);
      const int32_t dim = ix_no_embeddings ? 0 : hdt_codes_embedding_dim(codes.get());
      hdt_index* i = nullptr;
      check(hdt_index_create(hdt_codes_bits(codes.get()), ix_radius, dim, &i), "creating index");
      const Index index(i);
      check(hdt_index_add_codes(index.get(), codes.get(), 0), "indexing");
      check(hdt_index_save(index.get(), ix_out.c_str()), "writing " + ix_out);
      double expected = 0;
      check(hdt_expected_candidates(hdt_index_bits(index.get()), ix_radius,
                                    static_cast<double>(hdt_index_size(index.get())), &expected),
            "cost model");
      std::printf("indexed %lld rows (n=%d, r=%d, embeddings=%d) to %s; uniform-code candidates/query %.3g\n",
                  static_cast<long long>(hdt_index_size(index.get())), hdt_index_bits(index.get()), ix_radius, dim,
                  ix_out.c_str(), expected);
    } else if (*qy) {
      hdt_index* i = nullptr;
      check(hdt_index_load(qy_index.c_str(), &i), "loading " + qy_index);
      const Index index(i);
      Codes queries;
      if (!qy_code.empty()) {
        hdt_codes* c = nullptr;
        check(hdt_codes_from_string(qy_code.c_str(), &c), "parsing --code");
        queries.reset(c);
      } else if (!qy_codes.empty()) {
        queries = read_codes(qy_codes);
      } else {
        std::cerr << "error: query needs --code or --codes\n";
        return 2;
      }
      const int32_t bits = hdt_codes_bits(queries.get());
      std::vector<uint64_t> words(static_cast<std::size_t>((bits + 63) / 64));
      int64_t count = hdt_codes_count(queries.get());
      if (qy_limit > 0) count = std::min(count, qy_limit);
      for (int64_t q = 0; q < count; ++q) {
        check(hdt_codes_words(queries.get(), q, words.data(), static_cast<int32_t>(words.size())), "reading code");
        hdt_result* r = nullptr;
        if (qy_rank > 0) {
          const float* emb = hdt_codes_embedding(queries.get(), q);
          if (!emb) {
            std::cerr << "error: --rank needs query codes with embeddings\n";
            return 2;
          }
          check(hdt_index_lookup_ranked(index.get(), words.data(), bits, emb, hdt_codes_embedding_dim(queries.get()),
                                        qy_rank, &r),
                "ranked lookup");
        } else {
          check(hdt_index_lookup(index.get(), words.data(), bits, &r), "lookup");
        }
        const Result result(r);
        print_result(q, result.get(), qy_rank > 0);
      }
    } else if (*bn) {
      const Config cfg = new_config();
      const Matrix base = read_matrix(bn_base);
      Model model;
      if (bn_baseline_bits > 0) {
        bn_flags.apply(bn, cfg.get());
        const uint64_t seed = std::stoull(config_value(cfg.get(), "seed"));
        model = baseline_model(hdt_matrix_cols(base.get()), bn_baseline_bits, seed, bn_base);
        check(hdt_config_set(cfg.get(), "n", std::to_string(bn_baseline_bits).c_str()), "setting n");
      } else if (!bn_model.empty()) {
        // Checkpoint settings first; --config and --set override them.
        hdt_model* m = nullptr;
        check(hdt_model_load(bn_model.c_str(), cfg.get(), &m), "loading " + bn_model);
        model.reset(m);
        bn_flags.apply(bn, cfg.get());
      } else {
        std::cerr << "error: bench needs --model or --baseline\n";
        return 2;
      }
      const Matrix query = read_matrix(bn_query);
      const Neighbors truth = read_neighbors(bn_gt);
      hdt_report* r = nullptr;
      check(hdt_bench(model.get(), base.get(), query.get(), truth.get(), cfg.get(), &r), "benchmark");
      const Report report(r);
      char* text = nullptr;
      check(hdt_report_format_text(report.get(), bn_label.c_str(), HDT_REPORT_TABLE, &text), "report");
      std::cout << take_string(text);
      check(hdt_report_format_text(report.get(), bn_label.c_str(), HDT_REPORT_RECORD, &text), "report");
      const std::string record = take_string(text);
      std::cout << record;
      if (!bn_records.empty()) {
        std::ofstream out(bn_records, std::ios::app);
        out << record;
      }
      if (!bn_per_query.empty()) {
        check(hdt_report_format_text(report.get(), bn_label.c_str(), HDT_REPORT_PER_QUERY, &text), "report");
        write_text(bn_per_query, take_string(text));
      }
    } else if (*sim) {
      const double theta = sim_theta * std::numbers::pi / 180.0;
      std::vector<double> hist(static_cast<std::size_t>(std::max(sim_n, 0)) + 1);
      hdt_simulation s;
      check(hdt_simulate_distribution(sim_n, theta, sim_trials, sim_seed, hist.data(), &s), "simulation");
      std::printf("# n=%d theta=%.4g deg trials=%lld seed=%llu\n", sim_n, sim_theta, static_cast<long long>(sim_trials),
                  static_cast<unsigned long long>(sim_seed));
      std::printf("%6s  %12s  %12s\n", "k", "empirical", "binomial");
      for (int32_t k = 0; k <= sim_n; ++k) {
        double cdf_k = 0, cdf_prev = 0;
        check(hdt_binomial_cdf(k, sim_n, s.flip_expected, &cdf_k), "binomial");
        if (k > 0) check(hdt_binomial_cdf(k - 1, sim_n, s.flip_expected, &cdf_prev), "binomial");
        std::printf("%6d  %12.6f  %12.6f\n", k, hist[k], cdf_k - cdf_prev);
      }
      std::printf("bit_flip_rate=%.6f expected=%.6f total_variation=%.6f\n", s.flip_rate, s.flip_expected,
                  s.total_variation);
    } else if (*ad) {
      int32_t r = 0;
      check(hdt_advise_radius(ad_n, ad_count, &r), "advise");
      std::printf("n=%d N=%.6g log2(N)=%.3f -> r=%d (substring length %.3g)\n", ad_n, ad_count, std::log2(ad_count), r,
                  static_cast<double>(ad_n) / (r + 1));
      std::printf("%4s  %10s  %16s\n", "r", "n/(r+1)", "candidates/query");
      for (int32_t k = 0; k < std::min(ad_n, 8); ++k) {
        double expected = 0;
        check(hdt_expected_candidates(ad_n, k, ad_count, &expected), "cost model");
        std::printf("%4d  %10.3f  %16.6g%s\n", k, static_cast<double>(ad_n) / (k + 1), expected, k == r ? "  <-" : "");
      }
    }
  } catch (const Failed& f) {
    return f.status == HDT_ERR_CONFIG || f.status == HDT_ERR_INVALID_ARGUMENT ? 2 : 1;
  }
  return 0;
}
