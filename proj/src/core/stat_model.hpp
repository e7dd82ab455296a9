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

// Probability model relating the angle between two points on the unit
// hypersphere to the Hamming distance between their sign codes.
//
// Two conventions are used throughout:
//   * flip probability P = arccos(zi . zj) / pi, the chance a fixed bit differs;
//   * agreement probability q = 1 - P, the chance a fixed bit matches.
// With X ~ Binomial(n, P) the number of differing bits,
//   Pr[X <= r] = I(q; n - r, r + 1) = I(1 - P; n - r, r + 1),
// which is the quantity the log-likelihood helpers below are written in.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace hdt {

inline constexpr double kDefaultP0 = 0.05;

struct LikelihoodParams {
  int n = 0;
  int r = 0;
  double p0 = kDefaultP0;

  void validate() const;
};

/// arccos(clamp(zi . zj, -1, 1)) / pi. Both inputs must be unit-norm within 1e-6.
double bit_flip_probability(std::span<const double> zi, std::span<const double> zj);

/// Regularized incomplete beta function I(x; a, b) by continued fraction.
double reg_inc_beta(double x, double a, double b);

/// log I(x; a, b), accurate where I itself underflows.
double log_reg_inc_beta(double x, double a, double b);

/// Binomial CDF Pr[X <= r] for X ~ Binomial(n, p), evaluated as I(1 - p; n - r, r + 1).
double binomial_cdf(int r, int n, double p);

/// log Pr[at most r of n bits differ] given per-bit agreement probability q,
/// i.e. log I(q; n - r, r + 1), continued linearly below q = p0 with slope
/// (n - r) / p0. Finite for every q in [0, 1]; equals 0 at q = 1.
double log_binomial_cdf_safe(int r, int n, double q, double p0 = kDefaultP0);

/// d/dq of log_binomial_cdf_safe.
double dlog_binomial_cdf_dp(int r, int n, double q, double p0 = kDefaultP0);

/// log_binomial_cdf_safe and its derivative for fixed (r, n, p0), with the
/// beta normalizer and the knee value precomputed.
class LogWithinRadius {
 public:
  struct Value {
    double value;
    double slope;
  };

  LogWithinRadius(int r, int n, double p0);

  Value operator()(double q) const;

 private:
  int r_;
  int n_;
  double p0_;
  double a_ = 0;
  double b_ = 0;
  double lbeta_ = 0;
  double knee_value_ = 0;
  double knee_slope_ = 0;
};

struct HammingSimulation {
  int n = 0;
  double theta = 0;
  std::uint64_t trials = 0;
  std::vector<std::uint64_t> histogram;  // size n + 1
  std::vector<std::uint64_t> bit_flips;  // per bit position, size n
  double max_dot_error = 0;              // max |zi . zj - cos(theta)| observed

  std::vector<double> frequencies() const;
};

/// Samples pairs uniform on the (n-1)-sphere at angle theta apart and
/// histograms the Hamming distance between their sign codes. Deterministic
/// given the seed.
HammingSimulation simulate_hamming_distribution(int n, double theta, std::uint64_t trials,
                                                std::uint64_t seed);

/// Binomial(n, p) probability mass over {0, ..., n}.
std::vector<double> binomial_pmf(int n, double p);

/// 0.5 * sum |a_k - b_k|.
double total_variation(std::span<const double> a, std::span<const double> b);

}  // namespace hdt
