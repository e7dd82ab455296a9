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


// Exercises the shared library through its C header only.

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "hdt/hdt.h"

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("hdt_capi_" + name)).string();
}

struct Fixture : ::testing::Test {
  hdt_matrix* base = nullptr;
  hdt_matrix* train = nullptr;
  hdt_matrix* query = nullptr;
  hdt_neighbors* truth = nullptr;
  hdt_config* cfg = nullptr;

  void SetUp() override {
    hdt_synth_params p;
    hdt_synth_defaults(&p);
    p.clusters = 10;
    p.points_per_cluster = 30;
    p.dim = 8;
    p.train_count = 400;
    p.query_count = 50;
    p.groundtruth_k = 10;
    ASSERT_EQ(hdt_synth(&p, &base, &train, &query, &truth), HDT_OK);
    ASSERT_EQ(hdt_config_create(&cfg), HDT_OK);
    for (const char* kv : {"n=12", "r=1", "steps=30", "widths=16", "batch_size=32", "knn=5", "top_l=20"}) {
      ASSERT_EQ(hdt_config_assign(cfg, kv), HDT_OK) << kv;
    }
  }

  void TearDown() override {
    hdt_matrix_free(base);
    hdt_matrix_free(train);
    hdt_matrix_free(query);
    hdt_neighbors_free(truth);
    hdt_config_free(cfg);
  }
};

void count_steps(const hdt_train_step* step, void* user) {
  auto* seen = static_cast<std::vector<int>*>(user);
  seen->push_back(step->step);
  EXPECT_EQ(step->total_steps, 30);
  EXPECT_TRUE(std::isfinite(step->loss));
}

TEST(CApi, ErrorsAreReportedPerThread) {
  EXPECT_STREQ(hdt_status_name(HDT_ERR_FORMAT), "format error");
  hdt_matrix* m = nullptr;
  EXPECT_EQ(hdt_matrix_read("/nonexistent/x.fvecs", 0, &m), HDT_ERR_IO);
  EXPECT_EQ(m, nullptr);
  const std::string message = hdt_last_error();
  EXPECT_NE(message.find("/nonexistent/x.fvecs"), std::string::npos);

  std::thread other([] {
    EXPECT_STREQ(hdt_last_error(), "");
    EXPECT_EQ(hdt_matrix_create(2, 0, nullptr, nullptr), HDT_ERR_INVALID_ARGUMENT);
  });
  other.join();
  EXPECT_EQ(hdt_last_error(), message);

  EXPECT_EQ(hdt_index_create(16, 16, 0, nullptr), HDT_ERR_INVALID_ARGUMENT);
  hdt_index* index = nullptr;
  EXPECT_EQ(hdt_index_create(16, 16, 0, &index), HDT_ERR_CONFIG);
  hdt_matrix_free(nullptr);
  hdt_index_free(nullptr);
}

TEST(CApi, MatrixAndConfig) {
  const float data[6] = {1, 2, 3, 4, 5, 6};
  hdt_matrix* m = nullptr;
  ASSERT_EQ(hdt_matrix_create(2, 3, data, &m), HDT_OK);
  const auto path = temp_path("m.fvecs");
  ASSERT_EQ(hdt_matrix_write(m, path.c_str()), HDT_OK);
  hdt_matrix* back = nullptr;
  ASSERT_EQ(hdt_matrix_read(path.c_str(), 0, &back), HDT_OK);
  EXPECT_EQ(hdt_matrix_rows(back), 2);
  EXPECT_EQ(hdt_matrix_cols(back), 3);
  EXPECT_EQ(std::memcmp(hdt_matrix_data(back), data, sizeof(data)), 0);
  hdt_matrix_free(m);
  hdt_matrix_free(back);

  hdt_config* cfg = nullptr;
  ASSERT_EQ(hdt_config_create(&cfg), HDT_OK);
  EXPECT_EQ(hdt_config_set(cfg, "lambda", "1000"), HDT_OK);
  char* value = nullptr;
  ASSERT_EQ(hdt_config_get(cfg, "lambda", &value), HDT_OK);
  EXPECT_STREQ(value, "1000");
  hdt_string_free(value);
  EXPECT_EQ(hdt_config_set(cfg, "nope", "1"), HDT_ERR_CONFIG);
  EXPECT_EQ(hdt_config_assign(cfg, "group_size=5"), HDT_OK);
  EXPECT_EQ(hdt_config_validate(cfg), HDT_ERR_CONFIG);
  char* text = nullptr;
  ASSERT_EQ(hdt_config_dump(cfg, &text), HDT_OK);
  EXPECT_NE(std::string(text).find("group_size = 5"), std::string::npos);
  hdt_string_free(text);
  hdt_config_free(cfg);
}

TEST_F(Fixture, TrainHashIndexAndBench) {
  std::vector<int> seen;
  hdt_model* model = nullptr;
  ASSERT_EQ(hdt_train(train, cfg, count_steps, &seen, &model), HDT_OK) << hdt_last_error();
  EXPECT_EQ(seen.size(), 30u);
  EXPECT_EQ(hdt_model_bits(model), 12);
  EXPECT_EQ(hdt_model_input_dim(model), 8);

  // Checkpoint round trip hashes identically.
  const auto ckpt = temp_path("model.ckpt");
  ASSERT_EQ(hdt_model_save(model, cfg, ckpt.c_str()), HDT_OK);
  hdt_config* loaded_cfg = nullptr;
  ASSERT_EQ(hdt_config_create(&loaded_cfg), HDT_OK);
  hdt_model* loaded = nullptr;
  ASSERT_EQ(hdt_model_load(ckpt.c_str(), loaded_cfg, &loaded), HDT_OK);
  char* r = nullptr;
  ASSERT_EQ(hdt_config_get(loaded_cfg, "r", &r), HDT_OK);
  EXPECT_STREQ(r, "1");
  hdt_string_free(r);

  hdt_codes* codes = nullptr;
  hdt_codes* codes2 = nullptr;
  ASSERT_EQ(hdt_hash(model, base, &codes), HDT_OK);
  ASSERT_EQ(hdt_hash(loaded, base, &codes2), HDT_OK);
  ASSERT_EQ(hdt_codes_count(codes), 300);
  EXPECT_EQ(hdt_codes_embedding_dim(codes), 12);
  for (int64_t i = 0; i < 300; ++i) {
    uint64_t a = 0, b = 0;
    ASSERT_EQ(hdt_codes_words(codes, i, &a, 1), HDT_OK);
    ASSERT_EQ(hdt_codes_words(codes2, i, &b, 1), HDT_OK);
    EXPECT_EQ(a, b);
    EXPECT_LT(a, 1u << 12);
  }
  char* bits = nullptr;
  ASSERT_EQ(hdt_codes_string(codes, 0, &bits), HDT_OK);
  EXPECT_EQ(std::strlen(bits), 12u);
  hdt_string_free(bits);

  // Codes file round trip.
  const auto codes_path = temp_path("base.codes");
  ASSERT_EQ(hdt_codes_write(codes, codes_path.c_str()), HDT_OK);
  hdt_codes* reread = nullptr;
  ASSERT_EQ(hdt_codes_read(codes_path.c_str(), &reread), HDT_OK);
  EXPECT_EQ(hdt_codes_count(reread), 300);
  EXPECT_EQ(std::memcmp(hdt_codes_embedding(reread, 7), hdt_codes_embedding(codes, 7), 12 * sizeof(float)), 0);

  // Index: every base row finds itself; snapshot round trip preserves results.
  hdt_index* index = nullptr;
  ASSERT_EQ(hdt_index_create(12, 1, 12, &index), HDT_OK);
  ASSERT_EQ(hdt_index_add_codes(index, reread, 0), HDT_OK);
  EXPECT_EQ(hdt_index_size(index), 300);
  const auto snap = temp_path("index.snap");
  ASSERT_EQ(hdt_index_save(index, snap.c_str()), HDT_OK);
  hdt_index* index2 = nullptr;
  ASSERT_EQ(hdt_index_load(snap.c_str(), &index2), HDT_OK);
  for (int64_t i = 0; i < 300; i += 17) {
    uint64_t w = 0;
    ASSERT_EQ(hdt_codes_words(codes, i, &w, 1), HDT_OK);
    hdt_result* res = nullptr;
    ASSERT_EQ(hdt_index_lookup_ranked(index2, &w, 12, hdt_codes_embedding(codes, i), 12, 5, &res), HDT_OK);
    ASSERT_GE(hdt_result_count(res), 1);
    EXPECT_EQ(hdt_result_distance(res, 0), 0.0);
    hdt_query_stats s;
    hdt_result_stats(res, &s);
    EXPECT_LE(s.results_returned, s.distance_comparisons);
    EXPECT_LE(s.distance_comparisons, s.candidates_fetched);
    hdt_result_free(res);

    hdt_result* plain = nullptr;
    ASSERT_EQ(hdt_index_lookup(index, &w, 12, &plain), HDT_OK);
    EXPECT_EQ(hdt_result_hamming(plain, 0), 0);
    hdt_result_free(plain);
  }
  int removed = 0;
  ASSERT_EQ(hdt_index_remove(index, 0, &removed), HDT_OK);
  EXPECT_EQ(removed, 1);
  EXPECT_EQ(hdt_index_size(index), 299);
  const uint64_t too_wide = 1ULL << 13;
  hdt_result* bad = nullptr;
  EXPECT_NE(hdt_index_lookup(index, &too_wide, 12, &bad), HDT_OK);

  hdt_report* report = nullptr;
  ASSERT_EQ(hdt_bench(model, base, query, truth, cfg, &report), HDT_OK) << hdt_last_error();
  double recall = -1, dc = -1;
  ASSERT_EQ(hdt_report_metric(report, "recall", &recall), HDT_OK);
  ASSERT_EQ(hdt_report_metric(report, "distance_comparisons", &dc), HDT_OK);
  EXPECT_GE(recall, 0.0);
  EXPECT_LE(recall, 1.0);
  EXPECT_GE(dc, 0.0);
  EXPECT_EQ(hdt_report_metric(report, "nope", &dc), HDT_ERR_INVALID_ARGUMENT);
  char* record = nullptr;
  ASSERT_EQ(hdt_report_format_text(report, "capi", HDT_REPORT_RECORD, &record), HDT_OK);
  EXPECT_EQ(std::string(record).rfind("label=capi ", 0), 0u);
  hdt_string_free(record);

  hdt_report_free(report);
  hdt_index_free(index);
  hdt_index_free(index2);
  hdt_codes_free(codes);
  hdt_codes_free(codes2);
  hdt_codes_free(reread);
  hdt_model_free(model);
  hdt_model_free(loaded);
  hdt_config_free(loaded_cfg);
}

TEST_F(Fixture, BaselineAndKnn) {
  hdt_neighbors* nn = nullptr;
  ASSERT_EQ(hdt_knn(base, query, 10, 0, 0, &nn), HDT_OK);
  ASSERT_EQ(hdt_neighbors_rows(nn), 50);
  EXPECT_EQ(std::memcmp(hdt_neighbors_data(nn), hdt_neighbors_data(truth), 50 * 10 * sizeof(int32_t)), 0);
  hdt_neighbors_free(nn);

  hdt_model* rh = nullptr;
  ASSERT_EQ(hdt_model_random_hyperplane(8, 12, 3, nullptr, &rh), HDT_OK);
  EXPECT_EQ(hdt_model_save(rh, cfg, temp_path("rh.ckpt").c_str()), HDT_ERR_STATE);
  hdt_report* report = nullptr;
  ASSERT_EQ(hdt_bench(rh, base, query, truth, cfg, &report), HDT_OK);
  hdt_report_free(report);
  hdt_model_free(rh);
}

TEST(CApi, AnalysisHelpers) {
  int32_t r = -1;
  ASSERT_EQ(hdt_advise_radius(64, 1e6, &r), HDT_OK);
  EXPECT_EQ(r, 2);
  double e = 0;
  ASSERT_EQ(hdt_expected_candidates(32, 1, 1 << 20, &e), HDT_OK);
  EXPECT_DOUBLE_EQ(e, 32.0);
  double cdf = 0;
  ASSERT_EQ(hdt_binomial_cdf(2, 16, 1.0 / 12.0, &cdf), HDT_OK);
  EXPECT_NEAR(cdf, 0.8565125097757187, 1e-13);
  EXPECT_EQ(hdt_binomial_cdf(2, 16, 1.5, &cdf), HDT_ERR_INVALID_ARGUMENT);

  std::vector<double> hist(17);
  hdt_simulation s;
  ASSERT_EQ(hdt_simulate_distribution(16, M_PI / 12, 20000, 5, hist.data(), &s), HDT_OK);
  double total = 0;
  for (double h : hist) total += h;
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(s.flip_expected, 1.0 / 12.0, 1e-15);
  EXPECT_LT(s.total_variation, 0.1);
}

}  // namespace
