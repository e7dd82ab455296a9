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

// Test-only reference implementations. Nothing here calls into the library.

#pragma once

#include <cmath>

namespace hdt::test {

/// sum_{k=lo}^{hi} C(n,k) p^k (1-p)^(n-k), accumulated in long double.
inline double binomial_sum(int n, double p, int lo, int hi) {
  long double total = 0;
  long double choose = 1;  // C(n, k)
  for (int k = 0; k <= n; ++k) {
    if (k > 0) choose = choose * (n - k + 1) / k;
    if (k >= lo && k <= hi) {
      total += choose * std::pow(static_cast<long double>(p), k) *
               std::pow(1.0L - static_cast<long double>(p), n - k);
    }
  }
  return static_cast<double>(total);
}

}  // namespace hdt::test
