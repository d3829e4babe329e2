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

// Text checkpoint format, version 1:
//
//   mtgru-ckpt v1
//   [config]            key value lines: vocab_size embed_dim hidden_dim layers
//                       schedule reverse_source buckets
//   [state]             step train_loss_ema rng_state dev_perplexity adam_moments
//   [vocab N]           N token lines in id order
//   [param NAME]        one Matrix section per parameter, in Parameters::named() order
//   [adam_m NAME]       present when adam_moments is 1, same order
//   [adam_v NAME]
//   [end]
//
// Doubles are written with 17 significant digits, so save→load is bit-exact.

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtgru/seq2seq.hpp"

namespace mtgru {

inline constexpr const char* kCheckpointMagic = "mtgru-ckpt v1";

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  Seq2SeqModel model;
  TrainState state;
  std::vector<std::string> vocab;  // id → token; may be empty for toy runs
  std::vector<Bucket> buckets = default_buckets();
  bool reverse_source = false;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
/// Throws CheckpointError naming the offending section.
Checkpoint read_checkpoint(std::istream& in);

/// Writes to a temporary sibling then renames, so an existing file is never left half-written.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mtgru
