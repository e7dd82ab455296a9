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

#include "stat_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "error.hpp"

namespace hdt {
namespace {

constexpr double kCfEpsilon = 3e-16;
constexpr double kCfTiny = 1e-300;
constexpr int kCfMaxIterations = 20000;

double log_gamma(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

double log_beta(double a, double b) { return log_gamma(a) + log_gamma(b) - log_gamma(a + b); }

// Modified Lentz evaluation of the continued fraction for I(x; a, b);
// converges quickly for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double x, double a, double b) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kCfTiny) d = kCfTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kCfMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kCfTiny) d = kCfTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kCfTiny) c = kCfTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kCfTiny) d = kCfTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kCfTiny) c = kCfTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= kCfEpsilon) break;
  }
  return h;
}

// log of x^a (1-x)^b / (a B(a, b)) * cf, where y = 1 - x is passed exactly.
double log_lower_series(double x, double y, double a, double b, double lbeta) {
  return a * std::log(x) + b * std::log(y) - lbeta - std::log(a) +
         std::log(beta_continued_fraction(x, a, b));
}

bool use_lower(double x, double a, double b) { return x <= (a + 1.0) / (a + b + 2.0); }

void check_beta_domain(double x, double a, double b) {
  if (!(x >= 0.0 && x <= 1.0) || !(a > 0.0) || !(b > 0.0)) {
    fail(ErrorCode::InvalidArgument, "reg_inc_beta domain: need 0 <= x <= 1, a > 0, b > 0 (x=" +
                                         std::to_string(x) + ", a=" + std::to_string(a) +
                                         ", b=" + std::to_string(b) + ")");
  }
}

// I(x; a, b) with the complement y = 1 - x supplied so that neither tail
// loses precision to the subtraction.
double ibeta(double x, double y, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double lbeta = log_beta(a, b);
  if (use_lower(x, a, b)) return std::exp(log_lower_series(x, y, a, b, lbeta));
  return 1.0 - std::exp(log_lower_series(y, x, b, a, lbeta));
}

double log_ibeta(double x, double y, double a, double b, double lbeta) {
  if (x <= 0.0) return -INFINITY;
  if (y <= 0.0) return 0.0;
  if (use_lower(x, a, b)) return log_lower_series(x, y, a, b, lbeta);
  return std::log1p(-std::exp(log_lower_series(y, x, b, a, lbeta)));
}

void check_rn(int r, int n) {
  if (n < 1 || r < 0 || r > n) {
    fail(ErrorCode::InvalidArgument,
         "need 0 <= r <= n and n >= 1 (r=" + std::to_string(r) + ", n=" + std::to_string(n) + ")");
  }
}

void check_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "probability outside [0, 1]: " + std::to_string(p));
  }
}

void check_p0(double p0) {
  if (!(p0 > 0.0 && p0 < 1.0)) {
    fail(ErrorCode::InvalidArgument, "p0 must lie in (0, 1), got " + std::to_string(p0));
  }
}

}  // namespace

void LikelihoodParams::validate() const {
  check_rn(r, n);
  if (r >= n) fail(ErrorCode::Config, "Hamming target r must be below n");
  check_p0(p0);
}

double bit_flip_probability(std::span<const double> zi, std::span<const double> zj) {
  require(zi.size() == zj.size(), "bit_flip_probability: dimension mismatch");
  double dot = 0.0, ni = 0.0, nj = 0.0;
  for (std::size_t k = 0; k < zi.size(); ++k) {
    dot += zi[k] * zj[k];
    ni += zi[k] * zi[k];
    nj += zj[k] * zj[k];
  }
  if (std::fabs(std::sqrt(ni) - 1.0) > 1e-6 || std::fabs(std::sqrt(nj) - 1.0) > 1e-6) {
    fail(ErrorCode::InvalidArgument, "bit_flip_probability: inputs must be unit vectors");
  }
  return std::acos(std::clamp(dot, -1.0, 1.0)) / std::numbers::pi;
}

double reg_inc_beta(double x, double a, double b) {
  check_beta_domain(x, a, b);
  return ibeta(x, 1.0 - x, a, b);
}

double log_reg_inc_beta(double x, double a, double b) {
  check_beta_domain(x, a, b);
  return log_ibeta(x, 1.0 - x, a, b, log_beta(a, b));
}

double binomial_cdf(int r, int n, double p) {
  check_rn(r, n);
  check_probability(p);
  if (r == n) return 1.0;
  return ibeta(1.0 - p, p, n - r, r + 1);
}

LogWithinRadius::LogWithinRadius(int r, int n, double p0) : r_(r), n_(n), p0_(p0) {
  check_rn(r, n);
  check_p0(p0);
  if (r == n) return;
  a_ = n - r;
  b_ = r + 1;
  lbeta_ = log_beta(a_, b_);
  knee_value_ = log_ibeta(p0, 1.0 - p0, a_, b_, lbeta_);
  knee_slope_ = a_ / p0;
}

LogWithinRadius::Value LogWithinRadius::operator()(double q) const {
  check_probability(q);
  if (r_ == n_) return {0.0, 0.0};
  if (q < p0_) return {knee_value_ + knee_slope_ * (q - p0_), knee_slope_};
  const double log_cdf = log_ibeta(q, 1.0 - q, a_, b_, lbeta_);
  // Beta density over the CDF, both in log space.
  double log_density = (a_ - 1.0) * std::log(q) - lbeta_;
  if (b_ != 1.0) {
    if (q >= 1.0) return {log_cdf, 0.0};
    log_density += (b_ - 1.0) * std::log1p(-q);
  }
  return {log_cdf, std::exp(log_density - log_cdf)};
}

double log_binomial_cdf_safe(int r, int n, double q, double p0) {
  return LogWithinRadius(r, n, p0)(q).value;
}

double dlog_binomial_cdf_dp(int r, int n, double q, double p0) {
  return LogWithinRadius(r, n, p0)(q).slope;
}

std::vector<double> HammingSimulation::frequencies() const {
  std::vector<double> f(histogram.size());
  for (std::size_t k = 0; k < histogram.size(); ++k) {
    f[k] = trials ? static_cast<double>(histogram[k]) / static_cast<double>(trials) : 0.0;
  }
  return f;
}

HammingSimulation simulate_hamming_distribution(int n, double theta, std::uint64_t trials,
                                                std::uint64_t seed) {
  require(n >= 2, "simulate_hamming_distribution: need n >= 2");
  require(theta > 0.0 && theta < std::numbers::pi, "simulate_hamming_distribution: need 0 < theta < pi");

  HammingSimulation sim;
  sim.n = n;
  sim.theta = theta;
  sim.trials = trials;
  sim.histogram.assign(static_cast<std::size_t>(n) + 1, 0);
  sim.bit_flips.assign(static_cast<std::size_t>(n), 0);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  std::vector<double> zi(n), u(n);

  auto normalize = [](std::vector<double>& v) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  };

  for (std::uint64_t t = 0; t < trials; ++t) {
    for (auto& x : zi) x = normal(rng);
    normalize(zi);
    for (auto& x : u) x = normal(rng);
    double proj = 0.0;
    for (int k = 0; k < n; ++k) proj += u[k] * zi[k];
    for (int k = 0; k < n; ++k) u[k] -= proj * zi[k];
    normalize(u);

    int distance = 0;
    double dot = 0.0;
    for (int k = 0; k < n; ++k) {
      const double zj = c * zi[k] + s * u[k];
      dot += zi[k] * zj;
      if ((zi[k] >= 0.0) != (zj >= 0.0)) {
        ++distance;
        ++sim.bit_flips[k];
      }
    }
    sim.max_dot_error = std::max(sim.max_dot_error, std::fabs(dot - c));
    ++sim.histogram[distance];
  }
  return sim;
}

std::vector<double> binomial_pmf(int n, double p) {
  check_rn(0, n);
  check_probability(p);
  std::vector<double> pmf(static_cast<std::size_t>(n) + 1, 0.0);
  if (p == 0.0) {
    pmf[0] = 1.0;
    return pmf;
  }
  if (p == 1.0) {
    pmf[n] = 1.0;
    return pmf;
  }
  for (int k = 0; k <= n; ++k) {
    const double log_choose = log_gamma(n + 1.0) - log_gamma(k + 1.0) - log_gamma(n - k + 1.0);
    pmf[k] = std::exp(log_choose + k * std::log(p) + (n - k) * std::log1p(-p));
  }
  return pmf;
}

double total_variation(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "total_variation: size mismatch");
  double tv = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) tv += std::fabs(a[k] - b[k]);
  return 0.5 * tv;
}

}  // namespace hdt
