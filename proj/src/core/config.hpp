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

// Flat key-value configuration: one `key = value` per line, '#' starts a
// comment. Command-line overrides use the same `key=value` syntax.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "hdt_loss.hpp"

namespace hdt {

struct TrainSchedule {
  double learning_rate = 1e-2;
  int epochs = 20;
  int steps = 0;  // overrides epochs when positive
  std::vector<int> widths{256, 256, 256};
  std::uint64_t seed = 1;
  double bn_momentum = 0.99;
  double decay_at = 2.0 / 3.0;  // fraction of training before the step decay
  double decay_factor = 0.1;
  int knn = 10;                 // neighbors per training input
  int log_every = 50;
};

struct BenchOptions {
  int recall_k = 100;
  int relevant_k = 10;  // ground-truth neighbors counted as relevant
  int map_k = 1000;       // 0: skip MAP
  int pr_max_radius = -1;  // -1: up to r + 2
  int threads = 0;         // 0: hardware concurrency
  int max_queries = 0;     // 0: all
};

struct RunConfig {
  HdtConfig hdt;
  TrainSchedule schedule;
  BenchOptions bench;

  /// Applies one key; throws ErrorCode::Config on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  /// Applies every `key = value` line of a stream or file.
  void load(std::istream& in);
  void load_file(const std::string& path);
  /// Current value of a key as text.
  std::string get(const std::string& key) const;
  /// Every key in `key = value` form, one per line.
  std::string dump() const;
  void validate() const;

  static const std::vector<std::string>& keys();
};

/// Splits `key=value` (whitespace trimmed).
std::pair<std::string, std::string> parse_assignment(const std::string& text);

/// Reads `key = value` lines, skipping blanks and comments.
std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& in);

}  // namespace hdt
