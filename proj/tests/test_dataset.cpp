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


#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "config.hpp"
#include "dataset.hpp"
#include "error.hpp"

namespace hdt {
namespace {

std::string fixture(const char* name) { return std::string(HDT_TEST_DATA_DIR) + "/" + name; }

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("hdt_test_" + name)).string();
}

// Direct squared differences, sorted by (distance, index).
std::vector<int> oracle_knn(const FloatMatrix& base, const FloatMatrix& queries, int q, int k) {
  std::vector<std::pair<double, int>> d;
  for (int i = 0; i < base.rows(); ++i) {
    double s = 0;
    for (int j = 0; j < base.cols(); ++j) {
      const double diff = double(base(i, j)) - double(queries(q, j));
      s += diff * diff;
    }
    d.emplace_back(s, i);
  }
  std::sort(d.begin(), d.end());
  std::vector<int> out;
  for (int i = 0; i < k; ++i) out.push_back(d[i].second);
  return out;
}

TEST(Xvecs, ReadsIndependentFixtures) {
  const FloatMatrix f = read_xvecs(fixture("fixture.fvecs"), ElementKind::Real32);
  ASSERT_EQ(f.rows(), 2);
  ASSERT_EQ(f.cols(), 3);
  EXPECT_EQ(f(0, 0), 1.5f);
  EXPECT_EQ(f(0, 1), -2.0f);
  EXPECT_EQ(f(0, 2), 0.25f);
  EXPECT_EQ(f(1, 2), 1e-3f);

  const FloatMatrix b = read_xvecs(fixture("fixture.bvecs"), ElementKind::Byte);
  ASSERT_EQ(b.cols(), 4);
  EXPECT_EQ(b(0, 2), 255.0f);
  EXPECT_EQ(b(0, 3), 128.0f);

  const IntMatrix i = read_ivecs(fixture("fixture.ivecs"));
  ASSERT_EQ(i.rows(), 3);
  EXPECT_EQ(i(0, 1), -1);
  EXPECT_EQ(i(1, 0), 2147483647);
  EXPECT_EQ(i(2, 0), -2147483647 - 1);
  EXPECT_EQ(read_ivecs(fixture("fixture.ivecs"), 2).rows(), 2);
}

TEST(Xvecs, RoundTrip) {
  FloatMatrix m(5, 7);
  std::mt19937_64 rng(1);
  std::normal_distribution<float> normal;
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  const auto path = temp_path("rt.fvecs");
  write_xvecs(path, m, ElementKind::Real32);
  EXPECT_EQ(std::filesystem::file_size(path), 5u * (4 + 7 * 4));
  EXPECT_EQ(read_xvecs(path, kind_from_extension(path)), m);

  IntMatrix g(3, 2);
  g << 1, 2, 3, 4, 5, 6;
  const auto ipath = temp_path("rt.ivecs");
  write_ivecs(ipath, g);
  EXPECT_EQ(read_ivecs(ipath), g);

  FloatMatrix bytes(1, 3);
  bytes << 0, 17, 255;
  const auto bpath = temp_path("rt.bvecs");
  write_xvecs(bpath, bytes, ElementKind::Byte);
  EXPECT_EQ(read_xvecs(bpath, ElementKind::Byte), bytes);
}

TEST(Xvecs, RejectsMalformedFiles) {
  const auto path = temp_path("bad.fvecs");
  {
    std::ofstream out(path, std::ios::binary);
    const std::int32_t d = 3;
    const float v[3] = {1, 2, 3};
    out.write(reinterpret_cast<const char*>(&d), 4);
    out.write(reinterpret_cast<const char*>(v), 12);
    out.write(reinterpret_cast<const char*>(&d), 4);
    out.write(reinterpret_cast<const char*>(v), 8);  // truncated
  }
  try {
    read_xvecs(path, ElementKind::Real32);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Format);
  }
  {
    std::ofstream out(path, std::ios::binary);
    const std::int32_t dims[2] = {2, 1};
    const float v[2] = {1, 2};
    out.write(reinterpret_cast<const char*>(&dims[0]), 4);
    out.write(reinterpret_cast<const char*>(v), 8);
    out.write(reinterpret_cast<const char*>(&dims[1]), 4);  // record with d = 1 padded to the same size
    out.write(reinterpret_cast<const char*>(v), 8);
  }
  EXPECT_THROW(read_xvecs(path, ElementKind::Real32), Error);
  EXPECT_THROW(read_xvecs(temp_path("missing.fvecs"), ElementKind::Real32), Error);
  EXPECT_THROW(kind_from_extension("data.txt"), Error);
}

TEST(BruteForceKnn, HandExamples) {
  FloatMatrix base(3, 2);
  base << 0, 0, 3, 0, 0, 5;
  FloatMatrix q(1, 2);
  q << 1, 1;
  const IntMatrix nn = brute_force_knn(base, q, 3);
  EXPECT_EQ(nn(0, 0), 0);  // distance^2 2
  EXPECT_EQ(nn(0, 1), 1);  // 5
  EXPECT_EQ(nn(0, 2), 2);  // 17

  q << 3, 0;
  EXPECT_EQ(brute_force_knn(base, q, 1)(0, 0), 1);

  FloatMatrix tied(3, 1);
  tied << 2, 0, 2;
  FloatMatrix origin(1, 1);
  origin << 1;
  const IntMatrix t = brute_force_knn(tied, origin, 3);
  EXPECT_EQ(t(0, 0), 0);
  EXPECT_EQ(t(0, 1), 1);
  EXPECT_EQ(t(0, 2), 2);

  EXPECT_THROW(brute_force_knn(base, q, 4), Error);
  EXPECT_EQ(brute_force_knn(base, base, 1, true)(1, 0), 0);
}

TEST(BruteForceKnn, MatchesDirectDifferenceOracle) {
  std::mt19937_64 rng(2);
  std::normal_distribution<float> normal;
  FloatMatrix base(3000, 16), queries(40, 16);
  for (Eigen::Index i = 0; i < base.size(); ++i) base.data()[i] = normal(rng);
  for (Eigen::Index i = 0; i < queries.size(); ++i) queries.data()[i] = normal(rng);
  const IntMatrix nn = brute_force_knn(base, queries, 10);
  for (int q = 0; q < queries.rows(); ++q) {
    const auto expected = oracle_knn(base, queries, q, 10);
    for (int j = 0; j < 10; ++j) EXPECT_EQ(nn(q, j), expected[j]) << "query " << q << " rank " << j;
  }
}

TEST(Synth, DeterministicAndClustered) {
  SynthParams p;
  p.train_count = 100;
  p.query_count = 50;
  p.groundtruth_k = 5;
  const auto a = synth_dataset(p);
  const auto b = synth_dataset(p);
  EXPECT_EQ(a.base, b.base);
  EXPECT_EQ(a.query, b.query);
  EXPECT_EQ(a.groundtruth, b.groundtruth);
  EXPECT_EQ(a.base.rows(), 10000);
  EXPECT_EQ(a.base.cols(), 32);
  EXPECT_NO_THROW(a.validate());

  // Same-cluster distances sit below cross-cluster ones at the 99th percentile.
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> cluster(0, p.clusters - 1);
  std::uniform_int_distribution<int> member(0, p.points_per_cluster - 1);
  auto row = [&](int c) { return a.base.row(static_cast<Eigen::Index>(c) * p.points_per_cluster + member(rng)); };
  std::vector<double> same, cross;
  while (same.size() < 20000) {
    const int c = cluster(rng), other = cluster(rng);
    same.push_back((row(c) - row(c)).norm());
    if (other != c) cross.push_back((row(c) - row(other)).norm());
  }
  std::sort(same.begin(), same.end());
  std::sort(cross.begin(), cross.end());
  EXPECT_LT(same[same.size() * 99 / 100], cross[cross.size() / 100]);
}

TEST(Synth, NoiselessNeighborsShareTheCluster) {
  SynthParams p;
  p.clusters = 10;
  p.points_per_cluster = 10;
  p.dim = 8;
  p.noise = 0;
  p.train_count = 0;
  p.query_count = 30;
  p.groundtruth_k = 1;
  const auto ds = synth_dataset(p);
  for (int q = 0; q < 30; ++q) EXPECT_EQ(ds.base_labels[ds.groundtruth(q, 0)], ds.query_labels[q]);
}

TEST(Dataset, ValidateCatchesMismatches) {
  VectorDataset ds;
  ds.base = FloatMatrix::Zero(4, 3);
  ds.query = FloatMatrix::Zero(2, 2);
  EXPECT_THROW(ds.validate(), Error);
  ds.query = FloatMatrix::Zero(2, 3);
  ds.groundtruth = IntMatrix::Constant(2, 1, 7);
  EXPECT_THROW(ds.validate(), Error);
}

TEST(RunConfig, SetGetAndRoundTrip) {
  RunConfig c;
  c.set("lambda", "1000");
  c.set(" widths ", " 64, 32 ");
  c.set("seed", "18446744073709551615");
  EXPECT_DOUBLE_EQ(c.hdt.lambda, 1000);
  EXPECT_EQ(c.schedule.widths, (std::vector<int>{64, 32}));
  EXPECT_EQ(c.schedule.seed, 18446744073709551615ULL);
  EXPECT_EQ(c.get("widths"), "64,32");

  std::stringstream text(c.dump());
  RunConfig d;
  d.load(text);
  EXPECT_EQ(d.dump(), c.dump());
  EXPECT_EQ(RunConfig::keys().size(), 24u);

  try {
    c.set("lamda", "1");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Config);
  }
  EXPECT_THROW(c.set("n", "16x"), Error);
  EXPECT_THROW(c.set("widths", "8,0"), Error);
}

TEST(RunConfig, ParsesFilesWithComments) {
  std::stringstream in("# desk scale\nn = 32\n\n  r=1   # radius\nlambda = 1e3\n");
  RunConfig c;
  c.load(in);
  EXPECT_EQ(c.hdt.n, 32);
  EXPECT_EQ(c.hdt.r, 1);
  EXPECT_DOUBLE_EQ(c.hdt.lambda, 1000);
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(parse_assignment("a=b=c"), (std::pair<std::string, std::string>{"a", "b=c"}));
  EXPECT_THROW(parse_assignment("novalue"), Error);
  c.set("batch_size", "100");
  c.set("group_size", "3");
  EXPECT_THROW(c.validate(), Error);
}

}  // namespace
}  // namespace hdt
