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


// Acceptance checks. Prints one PASS, FAIL or SKIP line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "bench.hpp"
#include "dataset.hpp"
#include "gradient_check.hpp"
#include "multi_index.hpp"
#include "oracles.hpp"
#include "stat_model.hpp"
#include "trainer.hpp"

namespace {

using namespace hdt;
using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("%s %d %s: %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

void skip(int id, const char* name, const std::string& why) {
  std::printf("SKIP %d %s: %s\n", id, name, why.c_str());
  std::fflush(stdout);
}

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const double kTheta = std::numbers::pi / 12;  // 15 degrees

void binomial_fidelity() {
  const auto t0 = Clock::now();
  double tv16 = 0, tv64 = 0;
  for (int n : {16, 64}) {
    const auto sim = simulate_hamming_distribution(n, kTheta, 1000000, 101 + n);
    const auto freq = sim.frequencies();
    const auto pmf = binomial_pmf(n, 1.0 / 12.0);
    (n == 16 ? tv16 : tv64) = total_variation(freq, pmf);
  }
  const double elapsed = seconds_since(t0);
  report(1, "binomial-fidelity", tv16 <= 0.08 && tv64 <= 0.05 && elapsed <= 120,
         format("TV(n=16)=%.4f (<=0.08) TV(n=64)=%.4f (<=0.05) runtime=%.1fs (<=120s)", tv16, tv64, elapsed));
}

void marginal_exactness() {
  const std::uint64_t trials = 1000000;
  const auto sim = simulate_hamming_distribution(16, kTheta, trials, 202);
  const double p = 1.0 / 12.0;
  const double freq = static_cast<double>(sim.bit_flips[0]) / static_cast<double>(trials);
  const double se = std::sqrt(p * (1 - p) / static_cast<double>(trials));
  const double z = (freq - p) / se;
  report(2, "marginal-flip-rate", std::fabs(z) <= 3.0,
         format("bit-0 flip rate=%.6f expected=%.6f |z|=%.2f (<=3)", freq, p, std::fabs(z)));
}

void numerical_kernels() {
  double worst = 0;
  std::vector<double> grid{0.001};
  for (int i = 1; i <= 99; ++i) grid.push_back(i / 100.0);
  grid.push_back(0.999);
  for (int n = 1; n <= 64; ++n) {
    for (int r = 0; r < n; ++r) {
      for (double p : grid) {
        const double lib = reg_inc_beta(1.0 - p, n - r, r + 1);
        worst = std::max(worst, std::fabs(lib - test::binomial_sum(n, p, 0, r)));
      }
    }
  }
  double knee_gap = 0;
  bool finite = true;
  const double p0 = 0.05;
  for (int n = 1; n <= 64; ++n) {
    for (int r = 0; r <= n; ++r) {
      const double below = log_binomial_cdf_safe(r, n, std::nextafter(p0, 0.0), p0);
      const double at = log_binomial_cdf_safe(r, n, p0, p0);
      knee_gap = std::max(knee_gap, std::fabs(below - at));
      finite = finite && std::isfinite(log_binomial_cdf_safe(r, n, 1e-30, p0));
    }
  }
  report(3, "numerical-kernels", worst <= 1e-10 && knee_gap <= 1e-12 && finite,
         format("max |I - binomial sum|=%.2e (<=1e-10) knee gap=%.2e (<=1e-12) finite at 1e-30=%s", worst, knee_gap,
                finite ? "yes" : "no"));
}

void gradient_correctness() {
  const auto t0 = Clock::now();
  const auto g = test::check_tiny_model_gradient();
  const double elapsed = seconds_since(t0);
  const double worst = std::max(g.max_rel_error_logits, g.max_rel_error_weights);
  report(4, "gradient-check", worst <= 1e-3,
         format("max rel error dJ/dY=%.2e weights=%.2e (<=1e-3) runtime=%.2fs", g.max_rel_error_logits,
                g.max_rel_error_weights, elapsed));
}

std::vector<std::int64_t> scan(const std::vector<std::uint64_t>& codes, std::uint64_t q, int r) {
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (std::popcount(codes[i] ^ q) <= r) out.push_back(static_cast<std::int64_t>(i));
  }
  return out;
}

bool index_matches(const MultiIndex& index, const std::vector<std::uint64_t>& codes, std::uint64_t q, int bits) {
  const auto result = index.lookup(BinaryCode::from_uint(q, bits));
  std::vector<std::int64_t> got;
  for (const auto& h : result.hits) got.push_back(h.id);
  std::sort(got.begin(), got.end());
  return got == scan(codes, q, index.radius());
}

void index_exactness() {
  std::mt19937_64 rng(303);
  std::vector<std::uint64_t> codes(10000);
  for (auto& c : codes) c = rng() & 0xffffffffULL;
  long mismatches = 0, checked = 0;
  for (int r : {0, 1, 3}) {
    MultiIndex index(32, r);
    for (std::size_t i = 0; i < codes.size(); ++i) index.insert({static_cast<std::int64_t>(i), BinaryCode::from_uint(codes[i], 32), {}});
    for (int k = 0; k < 1000; ++k) {
      // Half the queries sit near stored codes so nonempty results are exercised.
      std::uint64_t q = rng() & 0xffffffffULL;
      if (k % 2 == 0) {
        q = codes[rng() % codes.size()];
        for (int f = 0; f < static_cast<int>(rng() % 5); ++f) q ^= 1ULL << (rng() % 32);
      }
      mismatches += !index_matches(index, codes, q, 32);
      ++checked;
    }
  }
  std::vector<std::uint64_t> small(200);
  for (auto& c : small) c = rng() & 0xff;
  MultiIndex tiny(8, 1);
  for (std::size_t i = 0; i < small.size(); ++i) tiny.insert({static_cast<std::int64_t>(i), BinaryCode::from_uint(small[i], 8), {}});
  for (std::uint64_t q = 0; q < 256; ++q) {
    mismatches += !index_matches(tiny, small, q, 8);
    ++checked;
  }
  report(5, "index-exactness", mismatches == 0,
         format("%ld of %ld lookups differ from the brute-force scan (r in {0,1,3} on 1e4 32-bit codes; all 256 queries at n=8 r=1)",
                mismatches, checked));
}

void cost_model() {
  const int bits = 32, r = 1;
  const std::int64_t count = 1 << 17;
  std::mt19937_64 rng(404);
  MultiIndex index(bits, r);
  for (std::int64_t i = 0; i < count; ++i) index.insert({i, BinaryCode::from_uint(rng() & 0xffffffffULL, bits), {}});
  const int queries = 2000;
  double fetched = 0;
  for (int k = 0; k < queries; ++k) {
    fetched += static_cast<double>(index.lookup(BinaryCode::from_uint(rng() & 0xffffffffULL, bits)).stats.candidates_fetched);
  }
  const double mean = fetched / queries;
  const double expected = expected_candidates(bits, r, static_cast<double>(count));
  const double formula = (r + 1) * static_cast<double>(count) / std::exp2(bits / (r + 1));
  report(6, "cost-model", expected == formula && std::fabs(mean - expected) <= 0.2 * expected,
         format("mean candidates=%.3f over %d queries, (r+1)N/2^(n/(r+1))=%.3f, within +-20%%: %s", mean, queries,
                formula, std::fabs(mean - expected) <= 0.2 * expected ? "yes" : "no"));
}

void desk_retrieval() {
  const auto t0 = Clock::now();
  SynthParams sp;  // 1e4 base, 1e3 queries, dim 32
  const VectorDataset data = synth_dataset(sp);
  HdtConfig cfg;
  cfg.n = 16;
  cfg.r = 0;
  BenchOptions options;
  options.map_k = 0;

  const RandomHyperplaneHasher baseline(sp.dim, cfg.n, 1, column_mean(data.train));
  cfg.lambda = 300;
  const double base_recall = run_benchmark(baseline, data, cfg, options).recall;

  TrainSchedule schedule;
  schedule.steps = 2000;
  schedule.learning_rate = 0.05;
  schedule.widths = {64, 64, 64};
  const SimilaritySource source = knn_similarity(data.train, schedule.knn);

  std::vector<double> recall, comparisons;
  std::string sweep;
  for (double lambda : {100.0, 300.0, 1000.0}) {
    cfg.lambda = lambda;
    const TrainResult trained = train(data.train, source, cfg, schedule);
    const ModelHasher hasher(trained.model);
    const auto rep = run_benchmark(hasher, data, cfg, options);
    recall.push_back(rep.recall);
    comparisons.push_back(rep.mean_distance_comparisons);
    sweep += format(" lambda=%g: recall=%.4f comparisons=%.2f;", lambda, rep.recall, rep.mean_distance_comparisons);
  }
  const double elapsed = seconds_since(t0);
  const bool beats = recall[1] >= 2 * base_recall;
  const bool monotone = recall[0] > recall[1] && recall[1] > recall[2] && comparisons[0] > comparisons[1] &&
                        comparisons[1] > comparisons[2];
  report(7, "desk-retrieval", beats && monotone && elapsed <= 1800,
         format("baseline recall@100=%.4f;%s 2x baseline: %s, monotone: %s, runtime=%.0fs (<=1800s)", base_recall,
                sweep.c_str(), beats ? "yes" : "no", monotone ? "yes" : "no", elapsed));
}

void sift_reproduction() {
  const char* dir = std::getenv("HDT_SIFT_DIR");
  if (dir == nullptr || *dir == '\0') {
    skip(8, "sift1m", "set HDT_SIFT_DIR to a directory holding sift_{base,learn,query}.fvecs and sift_groundtruth.ivecs");
    return;
  }
  const std::string root(dir);
  VectorDataset data;
  data.base = read_xvecs(root + "/sift_base.fvecs", ElementKind::Real32);
  data.train = read_xvecs(root + "/sift_learn.fvecs", ElementKind::Real32);
  data.query = read_xvecs(root + "/sift_query.fvecs", ElementKind::Real32);
  data.groundtruth = read_ivecs(root + "/sift_groundtruth.ivecs");
  data.validate();

  RunConfig run;
  run.hdt.n = 64;
  run.hdt.r = 2;
  run.hdt.lambda = 300;
  if (const char* steps = std::getenv("HDT_SIFT_STEPS")) run.schedule.steps = std::atoi(steps);
  const SimilaritySource source = knn_similarity(data.train, run.schedule.knn);
  const TrainResult trained = train(data.train, source, run.hdt, run.schedule);
  const ModelHasher hasher(trained.model);
  run.bench.map_k = 0;
  const auto rep = run_benchmark(hasher, data, run.hdt, run.bench);
  const bool recall_ok = std::fabs(rep.recall - 0.781) <= 0.10;
  const bool cost_ok = rep.mean_distance_comparisons <= 3 * 12709.0 && rep.mean_distance_comparisons >= 12709.0 / 3;
  report(8, "sift1m", recall_ok && cost_ok,
         format("recall@100=%.4f (0.781 +-0.10) mean comparisons=%.0f (12709 within 3x)", rep.recall,
                rep.mean_distance_comparisons));
}

void radius_advice() {
  const int r32 = advise_radius(32, 1e6);
  const int r64 = advise_radius(64, 1e6);
  report(9, "advise-radius", r32 == 1 && r64 == 2, format("(32, 1e6) -> %d (want 1), (64, 1e6) -> %d (want 2)", r32, r64));
}

void guarded(int id, const char* name, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("threw: ") + e.what());
  }
}

}  // namespace

int main() {
  guarded(1, "binomial-fidelity", binomial_fidelity);
  guarded(2, "marginal-flip-rate", marginal_exactness);
  guarded(3, "numerical-kernels", numerical_kernels);
  guarded(4, "gradient-check", gradient_correctness);
  guarded(5, "index-exactness", index_exactness);
  guarded(6, "cost-model", cost_model);
  guarded(7, "desk-retrieval", desk_retrieval);
  guarded(8, "sift1m", sift_reproduction);
  guarded(9, "advise-radius", radius_advice);
  std::printf("%s: %d criterion(s) failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
