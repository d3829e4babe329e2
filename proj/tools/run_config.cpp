/* Copyright 2026 The MTGRU Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "run_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>

namespace mtgru::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + value + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    return parse_double(value);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = {
      "vocab_size", "preset",       "embed_dim",   "hidden_dim",   "layers",       "schedule",
      "optimizer",  "learning_rate", "beta1",      "beta2",        "adam_epsilon", "clip_norm",
      "batch_size", "steps",        "eval_every",  "patience",     "buckets",      "seed",
      "reverse_source", "idf_unit", "log_wall_clock", "decode_max_len"};
  return k;
}

std::string buckets_to_string(const std::vector<Bucket>& buckets) {
  std::string out;
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(buckets[i].max_source_len) + ":" + std::to_string(buckets[i].max_target_len);
  }
  return out;
}

std::vector<Bucket> parse_buckets(const std::string& text) {
  std::vector<Bucket> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("buckets: expected SRC:TGT, got '" + item + "'");
    out.push_back({parse_unsigned("buckets", trim(item.substr(0, colon))),
                   parse_unsigned("buckets", trim(item.substr(colon + 1)))});
  }
  try {
    validate_buckets(out);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("buckets: ") + e.what());
  }
  return out;
}

void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "vocab_size") c.vocab_size = parse_unsigned(key, value);
  else if (key == "preset") {
    if (value == "desk") {
      const ModelDims d = desk_scale_dims(0);
      c.embed_dim = d.embed, c.hidden_dim = d.hidden, c.layers = d.layers;
    } else if (value == "full") {
      const ModelDims d = full_scale_dims(0);
      c.embed_dim = d.embed, c.hidden_dim = d.hidden, c.layers = d.layers;
    } else {
      throw ConfigError("preset: expected desk or full, got '" + value + "'");
    }
    c.preset = value;
  }
  else if (key == "embed_dim") c.embed_dim = parse_unsigned(key, value);
  else if (key == "hidden_dim") c.hidden_dim = parse_unsigned(key, value);
  else if (key == "layers") c.layers = parse_unsigned(key, value);
  else if (key == "schedule") c.schedule = value;
  else if (key == "optimizer") c.optimizer = value;
  else if (key == "learning_rate") c.learning_rate = parse_real(key, value);
  else if (key == "beta1") c.beta1 = parse_real(key, value);
  else if (key == "beta2") c.beta2 = parse_real(key, value);
  else if (key == "adam_epsilon") c.adam_epsilon = parse_real(key, value);
  else if (key == "clip_norm") c.clip_norm = parse_real(key, value);
  else if (key == "batch_size") c.batch_size = parse_unsigned(key, value);
  else if (key == "steps") c.steps = parse_unsigned(key, value);
  else if (key == "eval_every") c.eval_every = parse_unsigned(key, value);
  else if (key == "patience") c.patience = parse_unsigned(key, value);
  else if (key == "buckets") c.buckets = parse_buckets(value);
  else if (key == "seed") c.seed = parse_unsigned(key, value);
  else if (key == "reverse_source") c.reverse_source = parse_bool(key, value);
  else if (key == "idf_unit") {
    if (value == "paragraph") c.idf_unit = IdfUnit::Paragraph;
    else if (value == "article") c.idf_unit = IdfUnit::Article;
    else throw ConfigError("idf_unit: expected paragraph or article, got '" + value + "'");
  }
  else if (key == "log_wall_clock") c.log_wall_clock = parse_bool(key, value);
  else if (key == "decode_max_len") c.decode_max_len = parse_unsigned(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

RunConfig parse_config(std::istream& in, RunConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
    }
    try {
      apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  base.validate();
  return base;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  try {
    return parse_config(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void RunConfig::validate() const {
  if (vocab_size <= kNumSpecialTokens) throw ConfigError("vocab_size must exceed 4");
  if (embed_dim == 0 || hidden_dim == 0) throw ConfigError("embed_dim and hidden_dim must be positive");
  if (layers == 0) throw ConfigError("layers must be positive");
  timescales();
  optimizer_config();
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be a finite value >= 0");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("beta1 and beta2 must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ConfigError("adam_epsilon must be positive");
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (steps == 0) throw ConfigError("steps must be positive");
  if (eval_every == 0) throw ConfigError("eval_every must be positive");
  try {
    validate_buckets(buckets);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("buckets: ") + e.what());
  }
}

TimescaleSchedule RunConfig::timescales() const {
  TimescaleSchedule parsed{std::vector<double>{1.0}};
  try {
    parsed = TimescaleSchedule::parse(schedule, layers);
  } catch (const std::exception& e) {
    throw ConfigError("schedule: " + std::string(e.what()));
  }
  if (!TimescaleSchedule::is_fixed_length_preset(schedule) && parsed.layers() != layers) {
    throw ConfigError("schedule: " + std::to_string(parsed.layers()) + " timescales for " +
                      std::to_string(layers) + " layers");
  }
  return parsed;
}

ModelDims RunConfig::dims() const {
  // A fixed-length preset dictates the layer count.
  return {vocab_size, embed_dim, hidden_dim, timescales().layers()};
}

OptimizerConfig RunConfig::optimizer_config() const {
  OptimizerConfig o;
  try {
    o.kind = parse_optimizer(optimizer);
  } catch (const std::exception& e) {
    throw ConfigError("optimizer: " + std::string(e.what()));
  }
  o.learning_rate = learning_rate;
  o.beta1 = beta1;
  o.beta2 = beta2;
  o.epsilon = adam_epsilon;
  o.clip_norm = clip_norm;
  return o;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.dims = dims();
  t.schedule = timescales();
  t.optimizer = optimizer_config();
  t.buckets = buckets;
  t.batch_size = batch_size;
  t.steps = steps;
  t.eval_every = eval_every;
  t.patience = patience;
  t.seed = seed;
  t.reverse_source = reverse_source;
  return t;
}

void apply_seed_env(RunConfig& config) {
  const char* env = std::getenv("MTGRU_SEED");
  if (env == nullptr || *env == '\0') return;
  config.seed = parse_unsigned("MTGRU_SEED", env);
}

Split split_of(const std::string& doc_id, std::uint64_t seed) {
  std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a
  for (unsigned char c : doc_id) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  const std::uint64_t bucket = splitmix(h ^ splitmix(seed)) % 10;
  if (bucket < 8) return Split::Train;
  return bucket == 8 ? Split::Dev : Split::Test;
}

const char* split_name(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
  }
  return "train";
}

}  // namespace mtgru::cli
