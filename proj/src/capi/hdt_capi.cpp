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


#include "hdt/hdt.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <numbers>
#include <string>
#include <vector>

#include "bench.hpp"
#include "binary_io.hpp"
#include "config.hpp"
#include "dataset.hpp"
#include "error.hpp"
#include "multi_index.hpp"
#include "stat_model.hpp"
#include "trainer.hpp"

struct hdt_matrix {
  hdt::FloatMatrix m;
};

struct hdt_neighbors {
  hdt::IntMatrix m;
};

struct hdt_config {
  hdt::RunConfig c;
};

struct hdt_model {
  std::unique_ptr<hdt::Hasher> hasher;
  const hdt::DenseNetModel* trained = nullptr;  // set when hasher is a ModelHasher
};

struct hdt_codes {
  std::vector<hdt::BinaryCode> codes;
  hdt::FloatMatrix embeddings;  // rows == codes.size() or empty
  int bits = 0;
};

struct hdt_index {
  std::unique_ptr<hdt::MultiIndex> index;
};

struct hdt_result {
  hdt::LookupResult r;
};

struct hdt_report {
  hdt::RetrievalReport r;
};

namespace {

constexpr char kCodesMagic[8] = {'H', 'D', 'T', 'C', 'O', 'D', 'E', 'S'};
constexpr std::uint32_t kCodesVersion = 1;

thread_local std::string g_last_error;

hdt_status status_of(hdt::ErrorCode code) {
  switch (code) {
    case hdt::ErrorCode::InvalidArgument:
      return HDT_ERR_INVALID_ARGUMENT;
    case hdt::ErrorCode::Config:
      return HDT_ERR_CONFIG;
    case hdt::ErrorCode::Io:
      return HDT_ERR_IO;
    case hdt::ErrorCode::Format:
      return HDT_ERR_FORMAT;
    case hdt::ErrorCode::Diverged:
      return HDT_ERR_DIVERGED;
    case hdt::ErrorCode::State:
      return HDT_ERR_STATE;
  }
  return HDT_ERR_INTERNAL;
}

/// Runs body, translating exceptions into a status and the thread's last error.
template <typename Body>
hdt_status guarded(Body&& body) {
  try {
    body();
    return HDT_OK;
  } catch (const hdt::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return HDT_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HDT_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return HDT_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) hdt::fail(hdt::ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

hdt::BinaryCode code_from_words(const uint64_t* words, int32_t bits) {
  need(words, "words");
  if (bits < 1 || bits > hdt::kMaxCodeBits) hdt::fail(hdt::ErrorCode::InvalidArgument, "code length must be in [1, 256]");
  return hdt::BinaryCode::from_words(std::span<const std::uint64_t>(words, static_cast<std::size_t>((bits + 63) / 64)),
                                     bits);
}

}  // namespace

extern "C" {

const char* hdt_version(void) { return "1.0.0"; }

const char* hdt_status_name(hdt_status status) {
  switch (status) {
    case HDT_OK:
      return "ok";
    case HDT_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case HDT_ERR_CONFIG:
      return "config error";
    case HDT_ERR_IO:
      return "I/O error";
    case HDT_ERR_FORMAT:
      return "format error";
    case HDT_ERR_DIVERGED:
      return "training diverged";
    case HDT_ERR_STATE:
      return "invalid state";
    case HDT_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

const char* hdt_last_error(void) { return g_last_error.c_str(); }

void hdt_string_free(char* s) { std::free(s); }

// ---- matrices ----

hdt_status hdt_matrix_create(int64_t rows, int32_t cols, const float* data, hdt_matrix** out) {
  return guarded([&] {
    need(out, "out");
    if (rows < 0 || cols < 1) hdt::fail(hdt::ErrorCode::InvalidArgument, "matrix needs rows >= 0 and cols >= 1");
    if (rows > 0) need(data, "data");
    auto m = std::make_unique<hdt_matrix>();
    m->m = Eigen::Map<const hdt::FloatMatrix>(data, rows, cols);
    *out = m.release();
  });
}

hdt_status hdt_matrix_read(const char* path, int64_t max_rows, hdt_matrix** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto m = std::make_unique<hdt_matrix>();
    m->m = hdt::read_xvecs(path, hdt::kind_from_extension(path), max_rows);
    *out = m.release();
  });
}

hdt_status hdt_matrix_write(const hdt_matrix* m, const char* path) {
  return guarded([&] {
    need(m, "matrix");
    need(path, "path");
    hdt::write_xvecs(path, m->m, hdt::kind_from_extension(path));
  });
}

int64_t hdt_matrix_rows(const hdt_matrix* m) { return m ? m->m.rows() : 0; }
int32_t hdt_matrix_cols(const hdt_matrix* m) { return m ? static_cast<int32_t>(m->m.cols()) : 0; }
const float* hdt_matrix_data(const hdt_matrix* m) { return m ? m->m.data() : nullptr; }
void hdt_matrix_free(hdt_matrix* m) { delete m; }

// ---- neighbors ----

hdt_status hdt_knn(const hdt_matrix* base, const hdt_matrix* queries, int32_t k, int exclude_self, int32_t threads,
                   hdt_neighbors** out) {
  (void)threads;  // brute_force_knn sizes its own pool
  return guarded([&] {
    need(base, "base");
    need(queries, "queries");
    need(out, "out");
    auto n = std::make_unique<hdt_neighbors>();
    n->m = hdt::brute_force_knn(base->m, queries->m, k, exclude_self != 0);
    *out = n.release();
  });
}

hdt_status hdt_neighbors_read(const char* path, hdt_neighbors** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto n = std::make_unique<hdt_neighbors>();
    n->m = hdt::read_ivecs(path);
    *out = n.release();
  });
}

hdt_status hdt_neighbors_write(const hdt_neighbors* n, const char* path) {
  return guarded([&] {
    need(n, "neighbors");
    need(path, "path");
    hdt::write_ivecs(path, n->m);
  });
}

int64_t hdt_neighbors_rows(const hdt_neighbors* n) { return n ? n->m.rows() : 0; }
int32_t hdt_neighbors_cols(const hdt_neighbors* n) { return n ? static_cast<int32_t>(n->m.cols()) : 0; }
const int32_t* hdt_neighbors_data(const hdt_neighbors* n) { return n ? n->m.data() : nullptr; }
void hdt_neighbors_free(hdt_neighbors* n) { delete n; }

// ---- synthetic data ----

void hdt_synth_defaults(hdt_synth_params* params) {
  if (!params) return;
  const hdt::SynthParams d;
  *params = {d.clusters, d.points_per_cluster, d.dim, d.noise, d.train_count, d.query_count, d.groundtruth_k, d.seed};
}

hdt_status hdt_synth(const hdt_synth_params* params, hdt_matrix** base, hdt_matrix** train, hdt_matrix** query,
                     hdt_neighbors** groundtruth) {
  return guarded([&] {
    need(params, "params");
    const hdt::SynthParams p{params->clusters,    params->points_per_cluster, params->dim,
                             params->noise,       params->train_count,        params->query_count,
                             params->groundtruth_k, params->seed};
    auto ds = hdt::synth_dataset(p);
    auto b = std::make_unique<hdt_matrix>();
    auto t = std::make_unique<hdt_matrix>();
    auto q = std::make_unique<hdt_matrix>();
    auto g = std::make_unique<hdt_neighbors>();
    b->m = std::move(ds.base);
    t->m = std::move(ds.train);
    q->m = std::move(ds.query);
    g->m = std::move(ds.groundtruth);
    if (base) *base = b.release();
    if (train) *train = t.release();
    if (query) *query = q.release();
    if (groundtruth) *groundtruth = g.release();
  });
}

// ---- config ----

hdt_status hdt_config_create(hdt_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new hdt_config();
  });
}

hdt_status hdt_config_load_file(hdt_config* cfg, const char* path) {
  return guarded([&] {
    need(cfg, "config");
    need(path, "path");
    cfg->c.load_file(path);
  });
}

hdt_status hdt_config_set(hdt_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    need(cfg, "config");
    need(key, "key");
    need(value, "value");
    cfg->c.set(key, value);
  });
}

hdt_status hdt_config_assign(hdt_config* cfg, const char* assignment) {
  return guarded([&] {
    need(cfg, "config");
    need(assignment, "assignment");
    const auto [k, v] = hdt::parse_assignment(assignment);
    cfg->c.set(k, v);
  });
}

hdt_status hdt_config_get(const hdt_config* cfg, const char* key, char** value) {
  return guarded([&] {
    need(cfg, "config");
    need(key, "key");
    need(value, "value");
    *value = copy_string(cfg->c.get(key));
  });
}

hdt_status hdt_config_dump(const hdt_config* cfg, char** text) {
  return guarded([&] {
    need(cfg, "config");
    need(text, "text");
    *text = copy_string(cfg->c.dump());
  });
}

hdt_status hdt_config_validate(const hdt_config* cfg) {
  return guarded([&] {
    need(cfg, "config");
    cfg->c.validate();
  });
}

void hdt_config_free(hdt_config* cfg) { delete cfg; }

// ---- models ----

hdt_status hdt_train(const hdt_matrix* inputs, const hdt_config* cfg, hdt_train_callback callback, void* user,
                     hdt_model** out) {
  return guarded([&] {
    need(inputs, "inputs");
    need(cfg, "config");
    need(out, "out");
    cfg->c.validate();
    const auto& schedule = cfg->c.schedule;
    if (schedule.knn >= inputs->m.rows()) {
      hdt::fail(hdt::ErrorCode::Config, "knn must be smaller than the number of training inputs");
    }
    const hdt::SimilaritySource source = hdt::knn_similarity(inputs->m, schedule.knn);
    const int total = hdt::planned_steps(schedule, cfg->c.hdt.batch_size, inputs->m.rows());
    hdt::TraceCallback on_step;
    if (callback) {
      on_step = [&](const hdt::TraceEntry& e) {
        const hdt_train_step step{e.step, total, e.total, e.j1, e.j2, e.j3, e.learning_rate};
        callback(&step, user);
      };
    }
    hdt::TrainResult result = hdt::train(inputs->m, source, cfg->c.hdt, schedule, on_step);
    auto model = std::make_unique<hdt_model>();
    auto hasher = std::make_unique<hdt::ModelHasher>(std::move(result.model));
    model->trained = &hasher->model();
    model->hasher = std::move(hasher);
    *out = model.release();
  });
}

hdt_status hdt_model_random_hyperplane(int32_t input_dim, int32_t bits, uint64_t seed, const hdt_matrix* center,
                                       hdt_model** out) {
  return guarded([&] {
    need(out, "out");
    std::vector<float> c;
    if (center) {
      if (center->m.rows() != 1) hdt::fail(hdt::ErrorCode::InvalidArgument, "center must be a single row");
      c.assign(center->m.data(), center->m.data() + center->m.cols());
    }
    auto model = std::make_unique<hdt_model>();
    model->hasher = std::make_unique<hdt::RandomHyperplaneHasher>(input_dim, bits, seed, std::move(c));
    *out = model.release();
  });
}

hdt_status hdt_model_save(const hdt_model* model, const hdt_config* cfg, const char* path) {
  return guarded([&] {
    need(model, "model");
    need(path, "path");
    if (!model->trained) hdt::fail(hdt::ErrorCode::State, "only trained models have checkpoints");
    const hdt::HdtConfig loss = cfg ? cfg->c.hdt : hdt::HdtConfig{};
    model->trained->save(std::string(path), loss);
  });
}

hdt_status hdt_model_load(const char* path, hdt_config* cfg, hdt_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    hdt::HdtConfig loss;
    auto hasher = std::make_unique<hdt::ModelHasher>(hdt::DenseNetModel::load(std::string(path), &loss));
    auto model = std::make_unique<hdt_model>();
    model->trained = &hasher->model();
    model->hasher = std::move(hasher);
    if (cfg) {
      cfg->c.hdt = loss;
      cfg->c.schedule.widths = model->trained->widths();
    }
    *out = model.release();
  });
}

int32_t hdt_model_bits(const hdt_model* model) { return model ? model->hasher->bits() : 0; }
int32_t hdt_model_input_dim(const hdt_model* model) { return model ? model->hasher->input_dim() : 0; }
void hdt_model_free(hdt_model* model) { delete model; }

// ---- codes ----

hdt_status hdt_hash(const hdt_model* model, const hdt_matrix* inputs, hdt_codes** out) {
  return guarded([&] {
    need(model, "model");
    need(inputs, "inputs");
    need(out, "out");
    auto codes = std::make_unique<hdt_codes>();
    model->hasher->encode(inputs->m, codes->codes, &codes->embeddings);
    codes->bits = model->hasher->bits();
    *out = codes.release();
  });
}

hdt_status hdt_codes_from_string(const char* bits, hdt_codes** out) {
  return guarded([&] {
    need(bits, "bits");
    need(out, "out");
    auto codes = std::make_unique<hdt_codes>();
    codes->codes.push_back(hdt::BinaryCode::from_string(bits));
    codes->bits = codes->codes.back().size();
    *out = codes.release();
  });
}

int64_t hdt_codes_count(const hdt_codes* codes) { return codes ? static_cast<int64_t>(codes->codes.size()) : 0; }
int32_t hdt_codes_bits(const hdt_codes* codes) { return codes ? codes->bits : 0; }
int32_t hdt_codes_embedding_dim(const hdt_codes* codes) {
  return codes && codes->embeddings.rows() > 0 ? static_cast<int32_t>(codes->embeddings.cols()) : 0;
}

hdt_status hdt_codes_words(const hdt_codes* codes, int64_t i, uint64_t* words, int32_t capacity) {
  return guarded([&] {
    need(codes, "codes");
    need(words, "words");
    if (i < 0 || i >= static_cast<int64_t>(codes->codes.size())) {
      hdt::fail(hdt::ErrorCode::InvalidArgument, "code index out of range");
    }
    const auto w = codes->codes[i].words();
    if (capacity < static_cast<int32_t>(w.size())) hdt::fail(hdt::ErrorCode::InvalidArgument, "word buffer too small");
    std::copy(w.begin(), w.end(), words);
  });
}

hdt_status hdt_codes_string(const hdt_codes* codes, int64_t i, char** bits) {
  return guarded([&] {
    need(codes, "codes");
    need(bits, "bits");
    if (i < 0 || i >= static_cast<int64_t>(codes->codes.size())) {
      hdt::fail(hdt::ErrorCode::InvalidArgument, "code index out of range");
    }
    *bits = copy_string(codes->codes[i].to_string());
  });
}

const float* hdt_codes_embedding(const hdt_codes* codes, int64_t i) {
  if (!codes || codes->embeddings.rows() == 0 || i < 0 || i >= codes->embeddings.rows()) return nullptr;
  return codes->embeddings.row(i).data();
}

// Codes file (little-endian): char[8] "HDTCODES", u32 version, u16 bits,
// u32 embedding dim, u64 count, then per code: u16 bits, ceil(bits/64) u64
// words, f32[embedding dim].
hdt_status hdt_codes_write(const hdt_codes* codes, const char* path) {
  return guarded([&] {
    need(codes, "codes");
    need(path, "path");
    std::ofstream out(path, std::ios::binary);
    if (!out) hdt::fail(hdt::ErrorCode::Io, std::string("cannot open ") + path + " for writing");
    const auto dim = static_cast<std::uint32_t>(hdt_codes_embedding_dim(codes));
    hdt::io::put_bytes(out, kCodesMagic, sizeof(kCodesMagic));
    hdt::io::put<std::uint32_t>(out, kCodesVersion);
    hdt::io::put<std::uint16_t>(out, static_cast<std::uint16_t>(codes->bits));
    hdt::io::put<std::uint32_t>(out, dim);
    hdt::io::put<std::uint64_t>(out, codes->codes.size());
    for (std::size_t i = 0; i < codes->codes.size(); ++i) {
      hdt::write_code(out, codes->codes[i]);
      for (std::uint32_t j = 0; j < dim; ++j) hdt::io::put<float>(out, codes->embeddings(i, j));
    }
    if (!out) hdt::fail(hdt::ErrorCode::Io, std::string("failed writing ") + path);
  });
}

hdt_status hdt_codes_read(const char* path, hdt_codes** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    std::ifstream in(path, std::ios::binary);
    if (!in) hdt::fail(hdt::ErrorCode::Io, std::string("cannot open ") + path);
    char magic[8];
    hdt::io::get_bytes(in, magic, sizeof(magic), "codes magic");
    if (std::memcmp(magic, kCodesMagic, sizeof(magic)) != 0) hdt::fail(hdt::ErrorCode::Format, "not an HDT codes file");
    if (hdt::io::get<std::uint32_t>(in, "codes version") != kCodesVersion) {
      hdt::fail(hdt::ErrorCode::Format, "unsupported codes file version");
    }
    auto codes = std::make_unique<hdt_codes>();
    codes->bits = hdt::io::get<std::uint16_t>(in, "code bits");
    const auto dim = hdt::io::get<std::uint32_t>(in, "embedding dim");
    const auto count = hdt::io::get<std::uint64_t>(in, "code count");
    if (dim > 0) codes->embeddings.resize(static_cast<Eigen::Index>(count), dim);
    codes->codes.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      codes->codes.push_back(hdt::read_code(in));
      if (codes->codes.back().size() != codes->bits) hdt::fail(hdt::ErrorCode::Format, "code length mismatch");
      for (std::uint32_t j = 0; j < dim; ++j) codes->embeddings(i, j) = hdt::io::get<float>(in, "embedding");
    }
    *out = codes.release();
  });
}

void hdt_codes_free(hdt_codes* codes) { delete codes; }

// ---- index ----

hdt_status hdt_index_create(int32_t bits, int32_t radius, int32_t embedding_dim, hdt_index** out) {
  return guarded([&] {
    need(out, "out");
    auto index = std::make_unique<hdt_index>();
    index->index = std::make_unique<hdt::MultiIndex>(bits, radius, embedding_dim);
    *out = index.release();
  });
}

hdt_status hdt_index_add_codes(hdt_index* index, const hdt_codes* codes, int64_t first_id) {
  return guarded([&] {
    need(index, "index");
    need(codes, "codes");
    const bool with_embeddings = index->index->stores_embeddings();
    if (with_embeddings && codes->embeddings.rows() == 0) {
      hdt::fail(hdt::ErrorCode::InvalidArgument, "index stores embeddings but the codes carry none");
    }
    hdt::IndexRow row;
    for (std::size_t i = 0; i < codes->codes.size(); ++i) {
      row.id = first_id + static_cast<int64_t>(i);
      row.code = codes->codes[i];
      if (with_embeddings) {
        const float* e = codes->embeddings.row(i).data();
        row.embedding.assign(e, e + codes->embeddings.cols());
      }
      index->index->insert(row);
    }
  });
}

hdt_status hdt_index_insert(hdt_index* index, int64_t id, const uint64_t* words, int32_t bits, const float* embedding,
                            int32_t embedding_dim) {
  return guarded([&] {
    need(index, "index");
    hdt::IndexRow row{id, code_from_words(words, bits), {}};
    if (embedding_dim > 0) {
      need(embedding, "embedding");
      row.embedding.assign(embedding, embedding + embedding_dim);
    }
    index->index->insert(row);
  });
}

hdt_status hdt_index_remove(hdt_index* index, int64_t id, int* removed) {
  return guarded([&] {
    need(index, "index");
    const bool r = index->index->remove(id);
    if (removed) *removed = r ? 1 : 0;
  });
}

int64_t hdt_index_size(const hdt_index* index) { return index ? static_cast<int64_t>(index->index->size()) : 0; }
int32_t hdt_index_bits(const hdt_index* index) { return index ? index->index->bits() : 0; }
int32_t hdt_index_radius(const hdt_index* index) { return index ? index->index->radius() : 0; }
int32_t hdt_index_embedding_dim(const hdt_index* index) { return index ? index->index->embedding_dim() : 0; }

hdt_status hdt_index_lookup(const hdt_index* index, const uint64_t* words, int32_t bits, hdt_result** out) {
  return guarded([&] {
    need(index, "index");
    need(out, "out");
    auto result = std::make_unique<hdt_result>();
    result->r = index->index->lookup(code_from_words(words, bits));
    *out = result.release();
  });
}

hdt_status hdt_index_lookup_ranked(const hdt_index* index, const uint64_t* words, int32_t bits, const float* embedding,
                                   int32_t embedding_dim, int32_t l, hdt_result** out) {
  return guarded([&] {
    need(index, "index");
    need(embedding, "embedding");
    need(out, "out");
    if (embedding_dim < 1) hdt::fail(hdt::ErrorCode::InvalidArgument, "embedding_dim must be positive");
    auto result = std::make_unique<hdt_result>();
    result->r = index->index->lookup_ranked(code_from_words(words, bits),
                                            std::span<const float>(embedding, static_cast<std::size_t>(embedding_dim)), l);
    *out = result.release();
  });
}

hdt_status hdt_index_save(const hdt_index* index, const char* path) {
  return guarded([&] {
    need(index, "index");
    need(path, "path");
    index->index->save(std::string(path));
  });
}

hdt_status hdt_index_load(const char* path, hdt_index** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto index = std::make_unique<hdt_index>();
    index->index = hdt::MultiIndex::load(std::string(path));
    *out = index.release();
  });
}

void hdt_index_free(hdt_index* index) { delete index; }

int64_t hdt_result_count(const hdt_result* result) {
  return result ? static_cast<int64_t>(result->r.hits.size()) : 0;
}

int64_t hdt_result_id(const hdt_result* result, int64_t i) {
  return result && i >= 0 && i < hdt_result_count(result) ? result->r.hits[i].id : -1;
}

int32_t hdt_result_hamming(const hdt_result* result, int64_t i) {
  return result && i >= 0 && i < hdt_result_count(result) ? result->r.hits[i].hamming : -1;
}

double hdt_result_distance(const hdt_result* result, int64_t i) {
  return result && i >= 0 && i < hdt_result_count(result) ? result->r.hits[i].embedding_distance : NAN;
}

void hdt_result_stats(const hdt_result* result, hdt_query_stats* stats) {
  if (!result || !stats) return;
  const auto& s = result->r.stats;
  *stats = {s.candidates_fetched, s.distance_comparisons, s.embedding_comparisons, s.results_returned};
}

void hdt_result_free(hdt_result* result) { delete result; }

// ---- cost model and statistics ----

hdt_status hdt_expected_candidates(int32_t bits, int32_t radius, double count, double* out) {
  return guarded([&] {
    need(out, "out");
    if (radius < 0 || radius >= bits) hdt::fail(hdt::ErrorCode::InvalidArgument, "radius must satisfy 0 <= r < n");
    *out = hdt::expected_candidates(bits, radius, count);
  });
}

hdt_status hdt_advise_radius(int32_t bits, double count, int32_t* out) {
  return guarded([&] {
    need(out, "out");
    *out = hdt::advise_radius(bits, count);
  });
}

hdt_status hdt_binomial_cdf(int32_t r, int32_t n, double p, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = hdt::binomial_cdf(r, n, p);
  });
}

hdt_status hdt_simulate_distribution(int32_t bits, double theta, int64_t trials, uint64_t seed, double* histogram,
                                     hdt_simulation* summary) {
  return guarded([&] {
    if (trials < 1) hdt::fail(hdt::ErrorCode::InvalidArgument, "trials must be positive");
    const auto sim = hdt::simulate_hamming_distribution(bits, theta, static_cast<std::uint64_t>(trials), seed);
    const auto freq = sim.frequencies();
    const auto pmf = hdt::binomial_pmf(bits, theta / std::numbers::pi);
    if (histogram) std::copy(freq.begin(), freq.end(), histogram);
    if (summary) {
      summary->bits = bits;
      summary->theta = theta;
      summary->trials = trials;
      summary->flip_rate = static_cast<double>(sim.bit_flips[0]) / static_cast<double>(trials);
      summary->flip_expected = theta / std::numbers::pi;
      summary->total_variation = hdt::total_variation(freq, pmf);
    }
  });
}

// ---- benchmark ----

hdt_status hdt_bench(const hdt_model* model, const hdt_matrix* base, const hdt_matrix* queries,
                     const hdt_neighbors* groundtruth, const hdt_config* cfg, hdt_report** out) {
  return guarded([&] {
    need(model, "model");
    need(base, "base");
    need(queries, "queries");
    need(groundtruth, "groundtruth");
    need(cfg, "config");
    need(out, "out");
    hdt::VectorDataset data;
    data.base = base->m;
    data.query = queries->m;
    data.groundtruth = groundtruth->m;
    auto report = std::make_unique<hdt_report>();
    report->r = hdt::run_benchmark(*model->hasher, data, cfg->c.hdt, cfg->c.bench);
    *out = report.release();
  });
}

hdt_status hdt_report_metric(const hdt_report* report, const char* name, double* out) {
  return guarded([&] {
    need(report, "report");
    need(name, "name");
    need(out, "out");
    const auto& r = report->r;
    const std::string key(name);
    const std::pair<const char*, double> table[] = {
        {"recall", r.recall},
        {"map", r.map},
        {"candidates_fetched", r.mean_candidates_fetched},
        {"distance_comparisons", r.mean_distance_comparisons},
        {"embedding_comparisons", r.mean_embedding_comparisons},
        {"results_returned", r.mean_results_returned},
        {"expected_candidates", r.expected_candidates},
        {"empty_queries", static_cast<double>(r.empty_queries)},
        {"latency_mean_us", r.latency.mean_us},
        {"latency_p50_us", r.latency.p50_us},
        {"latency_p95_us", r.latency.p95_us},
        {"latency_p99_us", r.latency.p99_us},
        {"index_build_seconds", r.index_build_seconds},
        {"query_count", static_cast<double>(r.query_count)},
    };
    for (const auto& [k, v] : table) {
      if (key == k) {
        *out = v;
        return;
      }
    }
    hdt::fail(hdt::ErrorCode::InvalidArgument, "unknown report metric '" + key + "'");
  });
}

hdt_status hdt_report_format_text(const hdt_report* report, const char* label, hdt_report_format format, char** text) {
  return guarded([&] {
    need(report, "report");
    need(text, "text");
    const std::string name = label ? label : "run";
    switch (format) {
      case HDT_REPORT_TABLE:
        *text = copy_string(hdt::format_report(report->r, name));
        return;
      case HDT_REPORT_RECORD:
        *text = copy_string(hdt::format_report_record(report->r, name));
        return;
      case HDT_REPORT_PER_QUERY:
        *text = copy_string(hdt::format_query_records(report->r));
        return;
    }
    hdt::fail(hdt::ErrorCode::InvalidArgument, "unknown report format");
  });
}

void hdt_report_free(hdt_report* report) { delete report; }

}  // extern "C"
