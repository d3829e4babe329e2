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

#pragma once

// Flat key=value run configuration shared by the CLI commands.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtgru/corpus.hpp"
#include "mtgru/seq2seq.hpp"
#include "mtgru/training.hpp"

namespace mtgru::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::size_t vocab_size = 2000;
  std::string preset = "desk";  // desk | full; sets the dims not given explicitly
  std::size_t embed_dim = 32;
  std::size_t hidden_dim = 64;
  std::size_t layers = 2;
  std::string schedule = "1,1.5";

  std::string optimizer = "adam";
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double clip_norm = 5.0;

  std::size_t batch_size = 32;
  std::size_t steps = 2000;
  std::size_t eval_every = 100;
  std::size_t patience = 0;
  std::vector<Bucket> buckets = default_buckets();
  std::uint64_t seed = 1;
  bool reverse_source = true;

  IdfUnit idf_unit = IdfUnit::Paragraph;
  bool log_wall_clock = true;
  std::size_t decode_max_len = 0;  // 0: largest bucket target length minus EOS

  /// Every recognized key, in documentation order.
  static const std::vector<std::string>& keys();

  /// Throws ConfigError on the first out-of-range value.
  void validate() const;

  TimescaleSchedule timescales() const;
  ModelDims dims() const;
  OptimizerConfig optimizer_config() const;
  TrainConfig train_config() const;
};

/// Applies "key=value" lines on top of `base`. Blank lines and '#' comments
/// are ignored; unknown keys and malformed values are errors.
RunConfig parse_config(std::istream& in, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path);
/// Applies one assignment, as used by both the file parser and --set.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

std::string buckets_to_string(const std::vector<Bucket>& buckets);
std::vector<Bucket> parse_buckets(const std::string& text);

/// Seeds from MTGRU_SEED when the variable is set; throws ConfigError if it is not an integer.
void apply_seed_env(RunConfig& config);

enum class Split { Train, Dev, Test };
/// Deterministic 80/10/10 assignment of an article to a split.
Split split_of(const std::string& doc_id, std::uint64_t seed);
const char* split_name(Split split);

}  // namespace mtgru::cli
