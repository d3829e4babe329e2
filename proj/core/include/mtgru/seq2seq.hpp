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

// Stacked MTGRU encoder-decoder.
//
// The encoder and decoder share one embedding table and one timescale
// schedule. Decoder layer k starts from the final state of encoder layer k;
// there is no attention. Token ids 0..3 are reserved for PAD, GO, EOS, UNK.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mtgru/cells.hpp"
#include "mtgru/numkit.hpp"

namespace mtgru {

using TokenId = std::uint32_t;
using TokenSeq = std::vector<TokenId>;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kGo = 1;
inline constexpr TokenId kEos = 2;
inline constexpr TokenId kUnk = 3;
inline constexpr std::size_t kNumSpecialTokens = 4;

/// Per-layer timescale constants, bottom layer first. Every entry is >= 1.
class TimescaleSchedule {
 public:
  explicit TimescaleSchedule(std::vector<double> taus);

  /// "gru" (all ones, `layers` long), "mtgru-1", "mtgru-2", "mtgru-3" (four layers each).
  static TimescaleSchedule preset(std::string_view name, std::size_t layers);
  /// A preset name or a comma-separated list such as "1,1.5".
  static TimescaleSchedule parse(std::string_view text, std::size_t layers);
  static bool is_fixed_length_preset(std::string_view name);
  static std::vector<std::string> preset_names();

  const std::vector<double>& taus() const { return taus_; }
  std::size_t layers() const { return taus_.size(); }
  double operator[](std::size_t i) const { return taus_[i]; }
  bool operator==(const TimescaleSchedule&) const = default;

  std::string to_string() const;

 private:
  std::vector<double> taus_;
};

struct ModelDims {
  std::size_t vocab = 0;
  std::size_t embed = 32;
  std::size_t hidden = 64;
  std::size_t layers = 2;

  bool operator==(const ModelDims&) const = default;
};

/// Desk-scale defaults for a given vocabulary size.
ModelDims desk_scale_dims(std::size_t vocab);
/// Four layers of 1792 units over a 512-wide embedding.
ModelDims full_scale_dims(std::size_t vocab);

/// Trainable tensors. Also used as the gradient and optimizer-moment container.
struct Parameters {
  Matrix embedding;                 // vocab × embed
  std::vector<CellWeights> encoder;
  std::vector<CellWeights> decoder;
  Matrix projection;                // vocab × hidden

  struct Named {
    std::string name;
    Matrix* matrix;
  };
  struct ConstNamed {
    std::string name;
    const Matrix* matrix;
  };
  /// Fixed order: embedding, encoder.{k}.*, decoder.{k}.*, projection.
  std::vector<Named> named();
  std::vector<ConstNamed> named() const;

  Parameters zeros_like() const;
  Parameters& operator+=(const Parameters& other);
  Parameters& operator*=(double s);
  double squared_norm() const;
  bool all_finite() const;
  bool operator==(const Parameters&) const = default;
};

struct Seq2SeqModel {
  ModelDims dims;
  TimescaleSchedule schedule{std::vector<double>{1.0, 1.0}};
  Parameters params;

  static Seq2SeqModel create(const ModelDims& dims, const TimescaleSchedule& schedule, Rng& rng);
  /// Throws ShapeError when layer counts or dimensions disagree.
  void validate() const;
};

/// One training example; neither side carries GO or EOS.
struct Example {
  TokenSeq source;
  TokenSeq target;
};

struct Bucket {
  std::size_t max_source_len = 0;
  std::size_t max_target_len = 0;  // counts the EOS terminator
  bool operator==(const Bucket&) const = default;
};

std::vector<Bucket> default_buckets();
/// Smallest bucket that fits both lengths; nullopt on overflow.
std::optional<std::size_t> assign_bucket(std::size_t source_len, std::size_t target_len,
                                         std::span<const Bucket> buckets);
/// Throws std::invalid_argument unless buckets are nonempty, positive and sorted by source length.
void validate_buckets(std::span<const Bucket> buckets);

/// Padded batch. Sources are padded with PAD; targets are GO … EOS then PAD.
struct SequenceBatch {
  std::vector<TokenSeq> sources;
  std::vector<TokenSeq> targets;
  std::size_t size() const { return sources.size(); }
};

/// Pads `examples` to the given bucket. When `reverse_source` is set, each
/// source is reversed before padding.
SequenceBatch make_batch(std::span<const Example> examples, const Bucket& bucket,
                         bool reverse_source = false);

/// Final hidden state of every encoder layer (hidden × 1 each). PAD tokens are skipped.
std::vector<Matrix> encode(const Seq2SeqModel& model, const TokenSeq& source);

struct LossResult {
  double loss = 0.0;         // mean per-token cross-entropy
  double loss_sum = 0.0;
  std::size_t tokens = 0;
  Parameters grads;                  // empty unless gradients were requested
  std::vector<Matrix> d_init_hidden; // decoder-only passes: gradient w.r.t. the initial state
};

/// Teacher-forced decoder pass from `init_hidden` over a target that begins
/// with GO and ends with EOS. Gradients cover the decoder, projection and
/// embedding; d_init_hidden carries the gradient into the encoder.
LossResult decode_train(const Seq2SeqModel& model, const std::vector<Matrix>& init_hidden,
                        const TokenSeq& target);

/// Full encoder-decoder loss over a padded batch. PAD positions are masked.
LossResult batch_loss(const Seq2SeqModel& model, const SequenceBatch& batch, bool with_grads);

/// Greedy decoding: argmax each step (lowest id wins ties), stop at EOS or
/// after `max_len` tokens. The returned sequence excludes GO and EOS.
TokenSeq decode_greedy(const Seq2SeqModel& model, const std::vector<Matrix>& init_hidden,
                       std::size_t max_len);

double perplexity(double mean_token_loss);

/// Central finite differences of the summed batch cross-entropy against the
/// analytic gradient, over every parameter coordinate. Returns the maximum
/// relative error.
double model_finite_diff_check(const Seq2SeqModel& model, const SequenceBatch& batch,
                               double epsilon = 1e-5);

// ---------------------------------------------------------------------------
// Optimization

struct OptimizerConfig {
  enum class Kind { Adam, Sgd };
  Kind kind = Kind::Adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 5.0;
};

std::string_view optimizer_name(OptimizerConfig::Kind kind);
OptimizerConfig::Kind parse_optimizer(std::string_view name);

struct TrainState {
  std::uint64_t step = 0;
  double train_loss_ema = 0.0;
  std::vector<double> dev_perplexity;
  Parameters adam_m;  // empty until the first Adam step
  Parameters adam_v;
  Rng rng;

  bool operator==(const TrainState& other) const;
};

/// Scales `grads` so its global L2 norm is at most `max_norm`. Returns the norm before clipping.
double clip_global_norm(Parameters& grads, double max_norm);

/// One optimizer update on `batch`. Returns the batch loss before the update.
/// Throws NumericalError if the loss or gradients are not finite.
double train_step(Seq2SeqModel& model, TrainState& state, const SequenceBatch& batch,
                  const OptimizerConfig& opt);

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mtgru
