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


/* C interface to the HDT library: binary-hash training, multi-index search
 * and retrieval benchmarks.
 *
 * Conventions:
 *   - Every fallible call returns hdt_status; on failure hdt_last_error()
 *     describes it until the next failing call on the same thread.
 *   - Objects are opaque handles created by hdt_*_create/_read/_load and
 *     released by the matching hdt_*_free (which accept NULL).
 *   - Out-parameters are written only on success.
 *   - Strings returned through char** are heap-allocated; release them with
 *     hdt_string_free.
 *   - Codes cross the boundary as little-endian uint64 words holding the
 *     code read as an unsigned integer whose most significant bit is bit 0,
 *     with ceil(bits / 64) words and zero padding.
 *   - Handles are not synchronized, except hdt_index: any number of
 *     concurrent lookups, or one insert/remove at a time. */

#ifndef HDT_HDT_H_
#define HDT_HDT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HDT_API __declspec(dllexport)
#else
#define HDT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hdt_status {
  HDT_OK = 0,
  HDT_ERR_INVALID_ARGUMENT = 1,
  HDT_ERR_CONFIG = 2,
  HDT_ERR_IO = 3,
  HDT_ERR_FORMAT = 4,
  HDT_ERR_DIVERGED = 5,
  HDT_ERR_STATE = 6,
  HDT_ERR_INTERNAL = 7
} hdt_status;

HDT_API const char* hdt_version(void);
HDT_API const char* hdt_status_name(hdt_status status);
/* Message for the last failure on this thread; "" when none. */
HDT_API const char* hdt_last_error(void);
HDT_API void hdt_string_free(char* s);

/* ---- Dense float matrices (row-major) ---------------------------------- */

typedef struct hdt_matrix hdt_matrix;

HDT_API hdt_status hdt_matrix_create(int64_t rows, int32_t cols, const float* data, hdt_matrix** out);
/* Element kind follows the extension: .fvecs, .bvecs or .ivecs. max_rows <= 0 reads all. */
HDT_API hdt_status hdt_matrix_read(const char* path, int64_t max_rows, hdt_matrix** out);
/* .fvecs or .bvecs. */
HDT_API hdt_status hdt_matrix_write(const hdt_matrix* m, const char* path);
HDT_API int64_t hdt_matrix_rows(const hdt_matrix* m);
HDT_API int32_t hdt_matrix_cols(const hdt_matrix* m);
HDT_API const float* hdt_matrix_data(const hdt_matrix* m);
HDT_API void hdt_matrix_free(hdt_matrix* m);

/* ---- Neighbor lists (int32 rows, nearest first) ------------------------- */

typedef struct hdt_neighbors hdt_neighbors;

/* Exact k nearest base rows per query by Euclidean distance, ties by index.
 * exclude_self requires queries == base and skips each row's own index. */
HDT_API hdt_status hdt_knn(const hdt_matrix* base, const hdt_matrix* queries, int32_t k, int exclude_self,
                           int32_t threads, hdt_neighbors** out);
HDT_API hdt_status hdt_neighbors_read(const char* path, hdt_neighbors** out);
HDT_API hdt_status hdt_neighbors_write(const hdt_neighbors* n, const char* path);
HDT_API int64_t hdt_neighbors_rows(const hdt_neighbors* n);
HDT_API int32_t hdt_neighbors_cols(const hdt_neighbors* n);
HDT_API const int32_t* hdt_neighbors_data(const hdt_neighbors* n);
HDT_API void hdt_neighbors_free(hdt_neighbors* n);

/* ---- Synthetic clustered data ------------------------------------------ */

typedef struct hdt_synth_params {
  int32_t clusters;
  int32_t points_per_cluster; /* base rows per cluster */
  int32_t dim;
  double noise; /* per-coordinate standard deviation around unit-norm centers */
  int32_t train_count;
  int32_t query_count;
  int32_t groundtruth_k;
  uint64_t seed;
} hdt_synth_params;

HDT_API void hdt_synth_defaults(hdt_synth_params* params);
/* Any output pointer may be NULL. groundtruth is empty when query_count or groundtruth_k is 0. */
HDT_API hdt_status hdt_synth(const hdt_synth_params* params, hdt_matrix** base, hdt_matrix** train,
                             hdt_matrix** query, hdt_neighbors** groundtruth);

/* ---- Configuration (flat key = value) ----------------------------------- */

typedef struct hdt_config hdt_config;

HDT_API hdt_status hdt_config_create(hdt_config** out);
HDT_API hdt_status hdt_config_load_file(hdt_config* cfg, const char* path);
HDT_API hdt_status hdt_config_set(hdt_config* cfg, const char* key, const char* value);
/* Parses "key=value". */
HDT_API hdt_status hdt_config_assign(hdt_config* cfg, const char* assignment);
HDT_API hdt_status hdt_config_get(const hdt_config* cfg, const char* key, char** value);
HDT_API hdt_status hdt_config_dump(const hdt_config* cfg, char** text);
HDT_API hdt_status hdt_config_validate(const hdt_config* cfg);
HDT_API void hdt_config_free(hdt_config* cfg);

/* ---- Hash models -------------------------------------------------------- */

typedef struct hdt_model hdt_model;

typedef struct hdt_train_step {
  int32_t step;
  int32_t total_steps;
  double loss;
  double j1;
  double j2;
  double j3;
  double learning_rate;
} hdt_train_step;

typedef void (*hdt_train_callback)(const hdt_train_step* step, void* user);

/* Trains on `inputs` with similarity from the symmetrized knn-nearest-neighbor
 * relation (config key knn). The callback, when given, sees every step. */
HDT_API hdt_status hdt_train(const hdt_matrix* inputs, const hdt_config* cfg, hdt_train_callback callback,
                             void* user, hdt_model** out);
/* Random-hyperplane baseline; `center` (1 x input_dim, may be NULL) is subtracted first. */
HDT_API hdt_status hdt_model_random_hyperplane(int32_t input_dim, int32_t bits, uint64_t seed,
                                               const hdt_matrix* center, hdt_model** out);
/* Trained models only. The checkpoint records the loss settings of `cfg`. */
HDT_API hdt_status hdt_model_save(const hdt_model* model, const hdt_config* cfg, const char* path);
/* When cfg is not NULL, the checkpoint's loss settings are applied to it. */
HDT_API hdt_status hdt_model_load(const char* path, hdt_config* cfg, hdt_model** out);
HDT_API int32_t hdt_model_bits(const hdt_model* model);
HDT_API int32_t hdt_model_input_dim(const hdt_model* model);
HDT_API void hdt_model_free(hdt_model* model);

/* ---- Codes -------------------------------------------------------------- */

typedef struct hdt_codes hdt_codes;

/* One code and one unit-norm embedding per input row. */
HDT_API hdt_status hdt_hash(const hdt_model* model, const hdt_matrix* inputs, hdt_codes** out);
/* Parses '0'/'1' characters, bit 0 first, into one code with no embedding. */
HDT_API hdt_status hdt_codes_from_string(const char* bits, hdt_codes** out);
HDT_API int64_t hdt_codes_count(const hdt_codes* codes);
HDT_API int32_t hdt_codes_bits(const hdt_codes* codes);
HDT_API int32_t hdt_codes_embedding_dim(const hdt_codes* codes);
/* Copies ceil(bits / 64) words of code i. */
HDT_API hdt_status hdt_codes_words(const hdt_codes* codes, int64_t i, uint64_t* words, int32_t capacity);
HDT_API hdt_status hdt_codes_string(const hdt_codes* codes, int64_t i, char** bits);
/* NULL when the codes carry no embeddings or i is out of range. */
HDT_API const float* hdt_codes_embedding(const hdt_codes* codes, int64_t i);
HDT_API hdt_status hdt_codes_write(const hdt_codes* codes, const char* path);
HDT_API hdt_status hdt_codes_read(const char* path, hdt_codes** out);
HDT_API void hdt_codes_free(hdt_codes* codes);

/* ---- Multi-index -------------------------------------------------------- */

typedef struct hdt_index hdt_index;
typedef struct hdt_result hdt_result;

typedef struct hdt_query_stats {
  int64_t candidates_fetched;    /* substring matches, with multiplicity */
  int64_t distance_comparisons;  /* deduplicated full-code Hamming checks */
  int64_t embedding_comparisons; /* Euclidean checks while re-ranking */
  int64_t results_returned;
} hdt_query_stats;

/* embedding_dim > 0 stores an embedding per row and enables ranked lookups. */
HDT_API hdt_status hdt_index_create(int32_t bits, int32_t radius, int32_t embedding_dim, hdt_index** out);
/* Row i gets id first_id + i; embeddings are stored when the codes carry them. */
HDT_API hdt_status hdt_index_add_codes(hdt_index* index, const hdt_codes* codes, int64_t first_id);
/* Replaces any row with the same id. embedding may be NULL when the index stores none. */
HDT_API hdt_status hdt_index_insert(hdt_index* index, int64_t id, const uint64_t* words, int32_t bits,
                                    const float* embedding, int32_t embedding_dim);
HDT_API hdt_status hdt_index_remove(hdt_index* index, int64_t id, int* removed);
HDT_API int64_t hdt_index_size(const hdt_index* index);
HDT_API int32_t hdt_index_bits(const hdt_index* index);
HDT_API int32_t hdt_index_radius(const hdt_index* index);
HDT_API int32_t hdt_index_embedding_dim(const hdt_index* index);
/* Every row within the radius, by (Hamming distance, id). */
HDT_API hdt_status hdt_index_lookup(const hdt_index* index, const uint64_t* words, int32_t bits, hdt_result** out);
/* Up to l rows within the radius, by (squared Euclidean distance, id). */
HDT_API hdt_status hdt_index_lookup_ranked(const hdt_index* index, const uint64_t* words, int32_t bits,
                                           const float* embedding, int32_t embedding_dim, int32_t l,
                                           hdt_result** out);
HDT_API hdt_status hdt_index_save(const hdt_index* index, const char* path);
HDT_API hdt_status hdt_index_load(const char* path, hdt_index** out);
HDT_API void hdt_index_free(hdt_index* index);

HDT_API int64_t hdt_result_count(const hdt_result* result);
HDT_API int64_t hdt_result_id(const hdt_result* result, int64_t i);
HDT_API int32_t hdt_result_hamming(const hdt_result* result, int64_t i);
/* Squared Euclidean distance for ranked lookups, 0 otherwise. */
HDT_API double hdt_result_distance(const hdt_result* result, int64_t i);
HDT_API void hdt_result_stats(const hdt_result* result, hdt_query_stats* stats);
HDT_API void hdt_result_free(hdt_result* result);

/* ---- Cost model and statistics ------------------------------------------ */

/* Expected substring matches per query over `count` uniform random codes. */
HDT_API hdt_status hdt_expected_candidates(int32_t bits, int32_t radius, double count, double* out);
/* Radius whose substring length is closest to log2(count), ties to the smaller radius. */
HDT_API hdt_status hdt_advise_radius(int32_t bits, double count, int32_t* out);
/* P(X <= r) for X ~ Binomial(n, p). */
HDT_API hdt_status hdt_binomial_cdf(int32_t r, int32_t n, double p, double* out);

typedef struct hdt_simulation {
  int32_t bits;
  double theta;           /* radians */
  int64_t trials;
  double flip_rate;       /* empirical single-bit flip frequency */
  double flip_expected;   /* theta / pi */
  double total_variation; /* empirical histogram vs Binomial(bits, theta / pi) */
} hdt_simulation;

/* Hamming distances between sign codes of random unit-vector pairs at angle
 * theta. `histogram` (may be NULL) receives bits + 1 relative frequencies. */
HDT_API hdt_status hdt_simulate_distribution(int32_t bits, double theta, int64_t trials, uint64_t seed,
                                             double* histogram, hdt_simulation* summary);

/* ---- Retrieval benchmark ------------------------------------------------ */

typedef struct hdt_report hdt_report;

typedef enum hdt_report_format {
  HDT_REPORT_TABLE = 0,     /* aligned text for people */
  HDT_REPORT_RECORD = 1,    /* one key=value line */
  HDT_REPORT_PER_QUERY = 2  /* one key=value line per query */
} hdt_report_format;

/* Hashes `base` into an embedding-storing index with radius r, runs every
 * query through a ranked lookup with l = top_l and scores against `groundtruth`
 * (nearest first). Settings come from `cfg` (n, r, top_l, recall_k, map_k, ...). */
HDT_API hdt_status hdt_bench(const hdt_model* model, const hdt_matrix* base, const hdt_matrix* queries,
                             const hdt_neighbors* groundtruth, const hdt_config* cfg, hdt_report** out);
/* Metrics: recall, map, candidates_fetched, distance_comparisons,
 * embedding_comparisons, results_returned, expected_candidates,
 * empty_queries, latency_mean_us, latency_p50_us, latency_p95_us,
 * latency_p99_us, index_build_seconds, query_count. */
HDT_API hdt_status hdt_report_metric(const hdt_report* report, const char* name, double* out);
HDT_API hdt_status hdt_report_format_text(const hdt_report* report, const char* label, hdt_report_format format,
                                          char** text);
HDT_API void hdt_report_free(hdt_report* report);

#ifdef __cplusplus
}
#endif

#endif /* HDT_HDT_H_ */
