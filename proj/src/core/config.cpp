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

#include "config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "error.hpp"

namespace hdt {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  fail(ErrorCode::Config, "bad value for '" + key + "': '" + value + "'");
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, out);
  if (res.ec != std::errc{} || res.ptr != end) bad_value(key, value);
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) bad_value(key, value);
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, value);
  }
}

std::vector<int> parse_widths(const std::string& key, const std::string& value) {
  std::vector<int> widths;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const int w = parse_integer<int>(key, trim(item));
    if (w < 1) bad_value(key, value);
    widths.push_back(w);
  }
  return widths;
}

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

struct Field {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename Member>
Field int_field(Member member) {
  return {[member](RunConfig& c, const std::string& k, const std::string& v) {
            member(c) = parse_integer<std::remove_reference_t<decltype(member(c))>>(k, v);
          },
          [member](const RunConfig& c) { return std::to_string(member(const_cast<RunConfig&>(c))); }};
}

template <typename Member>
Field double_field(Member member) {
  return {[member](RunConfig& c, const std::string& k, const std::string& v) { member(c) = parse_double(k, v); },
          [member](const RunConfig& c) { return format_double(member(const_cast<RunConfig&>(c))); }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    t["n"] = int_field([](RunConfig& c) -> int& { return c.hdt.n; });
    t["r"] = int_field([](RunConfig& c) -> int& { return c.hdt.r; });
    t["lambda"] = double_field([](RunConfig& c) -> double& { return c.hdt.lambda; });
    t["lambda_w"] = double_field([](RunConfig& c) -> double& { return c.hdt.lambda_w; });
    t["p0"] = double_field([](RunConfig& c) -> double& { return c.hdt.p0; });
    t["batch_size"] = int_field([](RunConfig& c) -> int& { return c.hdt.batch_size; });
    t["group_size"] = int_field([](RunConfig& c) -> int& { return c.hdt.group_size; });
    t["top_l"] = int_field([](RunConfig& c) -> int& { return c.hdt.top_l; });
    t["lr"] = double_field([](RunConfig& c) -> double& { return c.schedule.learning_rate; });
    t["epochs"] = int_field([](RunConfig& c) -> int& { return c.schedule.epochs; });
    t["steps"] = int_field([](RunConfig& c) -> int& { return c.schedule.steps; });
    t["seed"] = int_field([](RunConfig& c) -> std::uint64_t& { return c.schedule.seed; });
    t["bn_momentum"] = double_field([](RunConfig& c) -> double& { return c.schedule.bn_momentum; });
    t["decay_at"] = double_field([](RunConfig& c) -> double& { return c.schedule.decay_at; });
    t["decay_factor"] = double_field([](RunConfig& c) -> double& { return c.schedule.decay_factor; });
    t["knn"] = int_field([](RunConfig& c) -> int& { return c.schedule.knn; });
    t["log_every"] = int_field([](RunConfig& c) -> int& { return c.schedule.log_every; });
    t["widths"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                     c.schedule.widths = parse_widths(k, v);
                   },
                   [](const RunConfig& c) {
                     std::string s;
                     for (std::size_t i = 0; i < c.schedule.widths.size(); ++i) {
                       if (i) s += ",";
                       s += std::to_string(c.schedule.widths[i]);
                     }
                     return s;
                   }};
    t["recall_k"] = int_field([](RunConfig& c) -> int& { return c.bench.recall_k; });
    t["relevant_k"] = int_field([](RunConfig& c) -> int& { return c.bench.relevant_k; });
    t["map_k"] = int_field([](RunConfig& c) -> int& { return c.bench.map_k; });
    t["pr_max_radius"] = int_field([](RunConfig& c) -> int& { return c.bench.pr_max_radius; });
    t["threads"] = int_field([](RunConfig& c) -> int& { return c.bench.threads; });
    t["max_queries"] = int_field([](RunConfig& c) -> int& { return c.bench.max_queries; });
    return t;
  }();
  return table;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto it = fields().find(trim(key));
  if (it == fields().end()) fail(ErrorCode::Config, "unknown config key '" + key + "'");
  it->second.set(*this, it->first, trim(value));
}

void RunConfig::load(std::istream& in) {
  for (const auto& [k, v] : parse_key_values(in)) set(k, v);
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open config file " + path);
  load(in);
}

std::string RunConfig::get(const std::string& key) const {
  const auto it = fields().find(key);
  if (it == fields().end()) fail(ErrorCode::Config, "unknown config key '" + key + "'");
  return it->second.get(*this);
}

std::string RunConfig::dump() const {
  std::string out;
  for (const auto& key : keys()) out += key + " = " + get(key) + "\n";
  return out;
}

void RunConfig::validate() const {
  hdt.validate();
  if (!(schedule.learning_rate >= 0)) fail(ErrorCode::Config, "lr must be nonnegative");
  if (schedule.epochs < 0 || schedule.steps < 0) fail(ErrorCode::Config, "epochs and steps must be nonnegative");
  if (schedule.widths.empty()) fail(ErrorCode::Config, "widths must list at least one hidden layer");
  if (!(schedule.bn_momentum >= 0 && schedule.bn_momentum < 1)) fail(ErrorCode::Config, "bn_momentum must lie in [0, 1)");
  if (schedule.knn < 1) fail(ErrorCode::Config, "knn must be positive");
  if (bench.recall_k < 1 || bench.relevant_k < 1) fail(ErrorCode::Config, "recall_k and relevant_k must be positive");
  if (bench.map_k < 0) fail(ErrorCode::Config, "map_k must be nonnegative (0 disables MAP)");
}

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> order{
      "n",        "r",           "lambda",        "lambda_w", "p0",           "batch_size",
      "group_size", "top_l",     "lr",            "epochs",   "steps",        "widths",
      "seed",     "bn_momentum", "decay_at",      "decay_factor", "knn",      "log_every",
      "recall_k", "relevant_k",  "map_k",         "pr_max_radius", "threads", "max_queries"};
  return order;
}

std::pair<std::string, std::string> parse_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) fail(ErrorCode::Config, "expected key=value, got '" + text + "'");
  return {trim(text.substr(0, eq)), trim(text.substr(eq + 1))};
}

std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    out.push_back(parse_assignment(line));
  }
  return out;
}

}  // namespace hdt
