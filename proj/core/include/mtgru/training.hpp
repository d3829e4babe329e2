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

// Bucketed training loop with periodic dev perplexity and best-checkpoint
// retention, plus the toy copy/reversal tasks used to sanity-check learning.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "mtgru/seq2seq.hpp"

namespace mtgru {

struct TrainConfig {
  ModelDims dims;
  TimescaleSchedule schedule{std::vector<double>{1.0, 1.5}};
  OptimizerConfig optimizer;
  std::vector<Bucket> buckets = default_buckets();
  std::size_t batch_size = 32;
  std::size_t steps = 2000;
  std::size_t eval_every = 100;
  std::size_t patience = 0;  // evaluations without improvement before stopping; 0 disables
  std::uint64_t seed = 1;
  bool reverse_source = false;
};

/// One line of the training log CSV.
struct LogRow {
  std::uint64_t step = 0;
  double wall_seconds = 0.0;
  double train_loss = 0.0;
  double train_ppl = 0.0;
  double dev_ppl = 0.0;
};

inline constexpr const char* kLogHeader = "step,wall_seconds,train_loss,train_ppl,dev_ppl";
/// With `wall_clock` false the wall_seconds column is written as 0 so logs are byte-reproducible.
void write_log_row(std::ostream& out, const LogRow& row, bool wall_clock = true);

struct BucketedExamples {
  std::vector<std::vector<Example>> by_bucket;
  std::size_t overflow = 0;
  std::size_t total() const;
};

BucketedExamples bucketize(std::span<const Example> examples, std::span<const Bucket> buckets);

/// exp(total cross-entropy / total target tokens) over `examples`, in input order.
double dataset_perplexity(const Seq2SeqModel& model, std::span<const Example> examples,
                          std::span<const Bucket> buckets, std::size_t batch_size,
                          bool reverse_source = false);

struct TrainHooks {
  std::function<void(const LogRow&)> on_log;
  /// Called whenever dev perplexity reaches a new minimum.
  std::function<void(const Seq2SeqModel&, const TrainState&)> on_best;
  /// Checked after each evaluation; returning true ends training early.
  std::function<bool(const Seq2SeqModel&, std::uint64_t step)> should_stop;
};

struct TrainOutcome {
  Seq2SeqModel best_model;
  TrainState best_state;
  Seq2SeqModel last_model;
  TrainState last_state;
  std::vector<LogRow> log;
  double best_dev_ppl = 0.0;
  std::uint64_t best_step = 0;
  std::size_t overflow = 0;
  bool diverged = false;
  std::string error;
};

/// Trains from a freshly initialized model (weights drawn from `config.seed`).
/// Stops after `config.steps`, on early stopping, or on a non-finite loss; in
/// the last case `diverged` is set and best_model is the last good snapshot.
TrainOutcome train(const TrainConfig& config, std::span<const Example> train_set,
                   std::span<const Example> dev_set, const TrainHooks& hooks = {});

/// Continues training an existing model and state for `steps` more updates
/// without evaluation. Used by tests and benchmarks.
void train_steps(Seq2SeqModel& model, TrainState& state, const TrainConfig& config,
                 std::span<const Example> train_set, std::size_t steps);

enum class ToyTask { Copy, Reverse };

/// Random sequences over ids [4, vocab) with lengths uniform in [1, max_len].
/// The target is the source itself (Copy) or its reversal (Reverse).
std::vector<Example> make_toy_examples(ToyTask task, std::size_t count, std::size_t vocab,
                                       std::size_t max_len, Rng& rng);

/// Fraction of target positions reproduced exactly by greedy decoding.
double token_accuracy(const Seq2SeqModel& model, std::span<const Example> examples,
                      bool reverse_source = false);

}  // namespace mtgru
