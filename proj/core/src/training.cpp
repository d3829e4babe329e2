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

#include "mtgru/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

namespace mtgru {

namespace {

// Draws batches bucket by bucket: a bucket is picked with probability
// proportional to its size, then the next examples of its shuffled order are
// taken. Orders are reshuffled when exhausted.
class BatchSampler {
 public:
  BatchSampler(const BucketedExamples& data, std::size_t batch_size, Rng& rng)
      : data_(data), batch_size_(batch_size), rng_(rng) {
    for (std::size_t b = 0; b < data_.by_bucket.size(); ++b) {
      orders_.emplace_back(data_.by_bucket[b].size());
      for (std::size_t i = 0; i < orders_[b].size(); ++i) orders_[b][i] = i;
      rng_.shuffle(orders_[b]);
      cursors_.push_back(0);
      total_ += data_.by_bucket[b].size();
    }
  }

  std::pair<std::size_t, std::vector<Example>> next() {
    std::uint64_t pick = rng_.uniform_index(total_);
    std::size_t bucket = 0;
    while (pick >= data_.by_bucket[bucket].size()) pick -= data_.by_bucket[bucket++].size();

    std::vector<Example> out;
    const std::size_t n = data_.by_bucket[bucket].size();
    const std::size_t take = std::min(batch_size_, n);
    for (std::size_t i = 0; i < take; ++i) {
      if (cursors_[bucket] == n) {
        rng_.shuffle(orders_[bucket]);
        cursors_[bucket] = 0;
      }
      out.push_back(data_.by_bucket[bucket][orders_[bucket][cursors_[bucket]++]]);
    }
    return {bucket, std::move(out)};
  }

 private:
  const BucketedExamples& data_;
  std::size_t batch_size_;
  Rng& rng_;
  std::vector<std::vector<std::size_t>> orders_;
  std::vector<std::size_t> cursors_;
  std::size_t total_ = 0;
};

constexpr std::uint64_t kSamplerSeedSalt = 0x5EED5A3B1E000001ULL;

}  // namespace

void write_log_row(std::ostream& out, const LogRow& row, bool wall_clock) {
  out << row.step << ',' << (wall_clock ? format_double(row.wall_seconds) : std::string("0")) << ','
      << format_double(row.train_loss) << ',' << format_double(row.train_ppl) << ','
      << format_double(row.dev_ppl) << '\n';
}

std::size_t BucketedExamples::total() const {
  std::size_t n = 0;
  for (const auto& b : by_bucket) n += b.size();
  return n;
}

BucketedExamples bucketize(std::span<const Example> examples, std::span<const Bucket> buckets) {
  validate_buckets(buckets);
  BucketedExamples out;
  out.by_bucket.resize(buckets.size());
  for (const Example& ex : examples) {
    auto idx = assign_bucket(ex.source.size(), ex.target.size() + 1, buckets);
    if (!idx || ex.source.empty()) {
      ++out.overflow;
      continue;
    }
    out.by_bucket[*idx].push_back(ex);
  }
  return out;
}

double dataset_perplexity(const Seq2SeqModel& model, std::span<const Example> examples,
                          std::span<const Bucket> buckets, std::size_t batch_size,
                          bool reverse_source) {
  const BucketedExamples data = bucketize(examples, buckets);
  double loss_sum = 0.0;
  std::size_t tokens = 0;
  for (std::size_t b = 0; b < data.by_bucket.size(); ++b) {
    const auto& items = data.by_bucket[b];
    for (std::size_t start = 0; start < items.size(); start += batch_size) {
      const std::size_t end = std::min(items.size(), start + batch_size);
      const SequenceBatch batch = make_batch(
          std::span<const Example>(items).subspan(start, end - start), buckets[b], reverse_source);
      const LossResult r = batch_loss(model, batch, false);
      loss_sum += r.loss_sum;
      tokens += r.tokens;
    }
  }
  if (tokens == 0) return std::numeric_limits<double>::quiet_NaN();
  return perplexity(loss_sum / static_cast<double>(tokens));
}

TrainOutcome train(const TrainConfig& config, std::span<const Example> train_set,
                   std::span<const Example> dev_set, const TrainHooks& hooks) {
  Rng init_rng(config.seed);
  TrainOutcome out;
  out.last_model = Seq2SeqModel::create(config.dims, config.schedule, init_rng);
  out.last_state.rng = Rng(config.seed ^ kSamplerSeedSalt);

  const BucketedExamples data = bucketize(train_set, config.buckets);
  out.overflow = data.overflow;
  if (data.total() == 0) throw std::invalid_argument("train: no training example fits the buckets");

  out.best_model = out.last_model;
  out.best_state = out.last_state;
  out.best_dev_ppl = std::numeric_limits<double>::infinity();

  BatchSampler sampler(data, config.batch_size, out.last_state.rng);
  const auto start = std::chrono::steady_clock::now();
  double interval_loss = 0.0;
  std::size_t interval_steps = 0;
  std::size_t stale_evals = 0;

  while (out.last_state.step < config.steps) {
    auto [bucket, examples] = sampler.next();
    const SequenceBatch batch = make_batch(examples, config.buckets[bucket], config.reverse_source);
    try {
      interval_loss += train_step(out.last_model, out.last_state, batch, config.optimizer);
    } catch (const NumericalError& e) {
      out.diverged = true;
      out.error = e.what();
      break;
    }
    ++interval_steps;

    const std::uint64_t step = out.last_state.step;
    if (step % config.eval_every != 0 && step != config.steps) continue;

    LogRow row;
    row.step = step;
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    row.train_loss = interval_loss / static_cast<double>(interval_steps);
    row.train_ppl = perplexity(row.train_loss);
    row.dev_ppl = dataset_perplexity(out.last_model, dev_set, config.buckets, config.batch_size,
                                     config.reverse_source);
    interval_loss = 0.0;
    interval_steps = 0;
    out.last_state.dev_perplexity.push_back(row.dev_ppl);
    out.log.push_back(row);
    if (hooks.on_log) hooks.on_log(row);

    if (row.dev_ppl < out.best_dev_ppl) {
      out.best_dev_ppl = row.dev_ppl;
      out.best_step = step;
      out.best_model = out.last_model;
      out.best_state = out.last_state;
      stale_evals = 0;
      if (hooks.on_best) hooks.on_best(out.best_model, out.best_state);
    } else {
      ++stale_evals;
    }
    if (config.patience > 0 && stale_evals >= config.patience) break;
    if (hooks.should_stop && hooks.should_stop(out.last_model, step)) break;
  }
  return out;
}

void train_steps(Seq2SeqModel& model, TrainState& state, const TrainConfig& config,
                 std::span<const Example> train_set, std::size_t steps) {
  const BucketedExamples data = bucketize(train_set, config.buckets);
  if (data.total() == 0) throw std::invalid_argument("train_steps: no example fits the buckets");
  BatchSampler sampler(data, config.batch_size, state.rng);
  for (std::size_t i = 0; i < steps; ++i) {
    auto [bucket, examples] = sampler.next();
    train_step(model, state,
               make_batch(examples, config.buckets[bucket], config.reverse_source),
               config.optimizer);
  }
}

std::vector<Example> make_toy_examples(ToyTask task, std::size_t count, std::size_t vocab,
                                       std::size_t max_len, Rng& rng) {
  if (vocab <= kNumSpecialTokens || max_len == 0) {
    throw std::invalid_argument("toy task needs vocab > 4 and max_len >= 1");
  }
  const std::size_t symbols = vocab - kNumSpecialTokens;
  std::vector<Example> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t len = 1 + static_cast<std::size_t>(rng.uniform_index(max_len));
    Example ex;
    for (std::size_t j = 0; j < len; ++j)
      ex.source.push_back(static_cast<TokenId>(kNumSpecialTokens + rng.uniform_index(symbols)));
    ex.target = ex.source;
    if (task == ToyTask::Reverse) std::reverse(ex.target.begin(), ex.target.end());
    out.push_back(std::move(ex));
  }
  return out;
}

double token_accuracy(const Seq2SeqModel& model, std::span<const Example> examples,
                      bool reverse_source) {
  std::size_t correct = 0, total = 0;
  for (const Example& ex : examples) {
    TokenSeq src = ex.source;
    if (reverse_source) std::reverse(src.begin(), src.end());
    const TokenSeq out = decode_greedy(model, encode(model, src), ex.target.size() + 1);
    for (std::size_t i = 0; i < ex.target.size(); ++i)
      if (i < out.size() && out[i] == ex.target[i]) ++correct;
    total += ex.target.size();
  }
  return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

}  // namespace mtgru
