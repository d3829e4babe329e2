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

#include "mtgru/seq2seq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mtgru {

// ---------------------------------------------------------------------------
// TimescaleSchedule

TimescaleSchedule::TimescaleSchedule(std::vector<double> taus) : taus_(std::move(taus)) {
  if (taus_.empty()) throw std::invalid_argument("timescale schedule needs at least one layer");
  for (double t : taus_) {
    if (!(t >= 1.0) || !std::isfinite(t)) {
      throw DomainError("timescale constant must be finite and >= 1, got " + format_double(t));
    }
  }
}

TimescaleSchedule TimescaleSchedule::preset(std::string_view name, std::size_t layers) {
  if (name == "gru") {
    if (layers == 0) throw std::invalid_argument("gru schedule needs at least one layer");
    return TimescaleSchedule(std::vector<double>(layers, 1.0));
  }
  if (name == "mtgru-1") return TimescaleSchedule({1.0, 1.25, 1.5, 1.7});
  if (name == "mtgru-2") return TimescaleSchedule({1.0, 1.42, 2.0, 2.5});
  if (name == "mtgru-3") return TimescaleSchedule({1.0, 1.0, 1.25, 1.25});
  throw std::invalid_argument("unknown schedule preset '" + std::string(name) + "'");
}

bool TimescaleSchedule::is_fixed_length_preset(std::string_view name) {
  return name == "mtgru-1" || name == "mtgru-2" || name == "mtgru-3";
}

std::vector<std::string> TimescaleSchedule::preset_names() {
  return {"gru", "mtgru-1", "mtgru-2", "mtgru-3"};
}

TimescaleSchedule TimescaleSchedule::parse(std::string_view text, std::size_t layers) {
  if (text == "gru" || is_fixed_length_preset(text)) return preset(text, layers);
  std::vector<double> taus;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view item = text.substr(pos, end - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    try {
      taus.push_back(parse_double(item));
    } catch (const std::runtime_error&) {
      throw std::invalid_argument("bad schedule '" + std::string(text) +
                                  "': expected a preset name or comma-separated numbers");
    }
    pos = end + 1;
  }
  return TimescaleSchedule(std::move(taus));
}

std::string TimescaleSchedule::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < taus_.size(); ++i) {
    if (i) out += ',';
    out += format_double(taus_[i]);
  }
  return out;
}

ModelDims desk_scale_dims(std::size_t vocab) { return {vocab, 32, 64, 2}; }
ModelDims full_scale_dims(std::size_t vocab) { return {vocab, 512, 1792, 4}; }

// ---------------------------------------------------------------------------
// Parameters

std::vector<Parameters::Named> Parameters::named() {
  std::vector<Named> out;
  out.push_back({"embedding", &embedding});
  for (std::size_t k = 0; k < encoder.size(); ++k) {
    auto ms = encoder[k].matrices();
    for (std::size_t i = 0; i < ms.size(); ++i)
      out.push_back({"encoder." + std::to_string(k) + "." + std::string(CellWeights::kNames[i]),
                     ms[i]});
  }
  for (std::size_t k = 0; k < decoder.size(); ++k) {
    auto ms = decoder[k].matrices();
    for (std::size_t i = 0; i < ms.size(); ++i)
      out.push_back({"decoder." + std::to_string(k) + "." + std::string(CellWeights::kNames[i]),
                     ms[i]});
  }
  out.push_back({"projection", &projection});
  return out;
}

std::vector<Parameters::ConstNamed> Parameters::named() const {
  std::vector<ConstNamed> out;
  for (auto& n : const_cast<Parameters*>(this)->named()) out.push_back({n.name, n.matrix});
  return out;
}

Parameters Parameters::zeros_like() const {
  Parameters z;
  z.embedding = Matrix::zeros_like(embedding);
  for (const auto& w : encoder) z.encoder.push_back(CellWeights::zeros(w.input_dim(), w.hidden_dim()));
  for (const auto& w : decoder) z.decoder.push_back(CellWeights::zeros(w.input_dim(), w.hidden_dim()));
  z.projection = Matrix::zeros_like(projection);
  return z;
}

Parameters& Parameters::operator+=(const Parameters& other) {
  auto mine = named();
  auto theirs = other.named();
  if (mine.size() != theirs.size()) throw ShapeError("Parameters: layer count mismatch");
  for (std::size_t i = 0; i < mine.size(); ++i) *mine[i].matrix += *theirs[i].matrix;
  return *this;
}

Parameters& Parameters::operator*=(double s) {
  for (auto& n : named()) *n.matrix *= s;
  return *this;
}

double Parameters::squared_norm() const {
  double total = 0.0;
  for (const auto& n : named()) total += frobenius_norm_squared(*n.matrix);
  return total;
}

bool Parameters::all_finite() const {
  for (const auto& n : named())
    if (!mtgru::all_finite(*n.matrix)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Model

Seq2SeqModel Seq2SeqModel::create(const ModelDims& dims, const TimescaleSchedule& schedule,
                                  Rng& rng) {
  if (dims.vocab <= kNumSpecialTokens || dims.embed == 0 || dims.hidden == 0 || dims.layers == 0) {
    throw std::invalid_argument("model dimensions must be positive and vocab > 4");
  }
  if (schedule.layers() != dims.layers) {
    throw ShapeError("schedule has " + std::to_string(schedule.layers()) + " entries for " +
                     std::to_string(dims.layers) + " layers");
  }
  Seq2SeqModel m;
  m.dims = dims;
  m.schedule = schedule;
  m.params.embedding = xavier_init(dims.vocab, dims.embed, rng);
  for (std::size_t k = 0; k < dims.layers; ++k)
    m.params.encoder.push_back(CellWeights::random(k == 0 ? dims.embed : dims.hidden, dims.hidden, rng));
  for (std::size_t k = 0; k < dims.layers; ++k)
    m.params.decoder.push_back(CellWeights::random(k == 0 ? dims.embed : dims.hidden, dims.hidden, rng));
  m.params.projection = xavier_init(dims.vocab, dims.hidden, rng);
  return m;
}

void Seq2SeqModel::validate() const {
  const auto& p = params;
  if (schedule.layers() != dims.layers || p.encoder.size() != dims.layers ||
      p.decoder.size() != dims.layers) {
    throw ShapeError("model: encoder/decoder/schedule layer counts disagree with " +
                     std::to_string(dims.layers) + " layers");
  }
  if (p.embedding.rows() != dims.vocab || p.embedding.cols() != dims.embed) {
    throw ShapeError("model: embedding is " + p.embedding.shape_string());
  }
  if (p.projection.rows() != dims.vocab || p.projection.cols() != dims.hidden) {
    throw ShapeError("model: projection is " + p.projection.shape_string());
  }
  for (const auto* stack : {&p.encoder, &p.decoder}) {
    for (std::size_t k = 0; k < stack->size(); ++k) {
      const CellWeights& w = (*stack)[k];
      w.validate();
      const std::size_t want_in = k == 0 ? dims.embed : dims.hidden;
      if (w.input_dim() != want_in || w.hidden_dim() != dims.hidden) {
        throw ShapeError("model: layer " + std::to_string(k) + " has input " +
                         std::to_string(w.input_dim()) + ", hidden " +
                         std::to_string(w.hidden_dim()));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Buckets and batches

std::vector<Bucket> default_buckets() { return {{15, 10}, {30, 15}, {60, 25}}; }

std::optional<std::size_t> assign_bucket(std::size_t source_len, std::size_t target_len,
                                         std::span<const Bucket> buckets) {
  if (buckets.empty()) throw std::invalid_argument("assign_bucket: no buckets");
  for (std::size_t i = 0; i < buckets.size(); ++i)
    if (buckets[i].max_source_len >= source_len && buckets[i].max_target_len >= target_len)
      return i;
  return std::nullopt;
}

void validate_buckets(std::span<const Bucket> buckets) {
  if (buckets.empty()) throw std::invalid_argument("bucket list is empty");
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    if (buckets[i].max_source_len == 0 || buckets[i].max_target_len == 0)
      throw std::invalid_argument("bucket lengths must be >= 1");
    if (i > 0 && buckets[i].max_source_len < buckets[i - 1].max_source_len)
      throw std::invalid_argument("buckets must be sorted by source length");
  }
}

SequenceBatch make_batch(std::span<const Example> examples, const Bucket& bucket,
                         bool reverse_source) {
  SequenceBatch batch;
  for (const Example& ex : examples) {
    if (ex.source.size() > bucket.max_source_len || ex.target.size() + 1 > bucket.max_target_len) {
      throw std::invalid_argument("make_batch: example does not fit its bucket");
    }
    TokenSeq src = ex.source;
    if (reverse_source) std::reverse(src.begin(), src.end());
    src.resize(bucket.max_source_len, kPad);
    TokenSeq tgt;
    tgt.reserve(bucket.max_target_len + 1);
    tgt.push_back(kGo);
    tgt.insert(tgt.end(), ex.target.begin(), ex.target.end());
    tgt.push_back(kEos);
    tgt.resize(bucket.max_target_len + 1, kPad);
    batch.sources.push_back(std::move(src));
    batch.targets.push_back(std::move(tgt));
  }
  return batch;
}

// ---------------------------------------------------------------------------
// Stack forward/backward

namespace {

using Mask = std::vector<unsigned char>;

struct StackRun {
  std::vector<std::vector<StepCache>> caches;  // [layer][t]
  std::vector<Matrix> final_h;                 // per layer
  std::vector<Matrix> top_h;                   // per t
};

void check_token(TokenId id, std::size_t vocab) {
  if (id >= vocab) {
    throw std::invalid_argument("token id " + std::to_string(id) + " outside vocabulary of " +
                                std::to_string(vocab));
  }
}

Matrix embed_column_batch(const Matrix& embedding, const std::vector<TokenId>& tokens) {
  Matrix x(embedding.cols(), tokens.size());
  for (std::size_t b = 0; b < tokens.size(); ++b) {
    check_token(tokens[b], embedding.rows());
    auto row = embedding.row(tokens[b]);
    for (std::size_t i = 0; i < row.size(); ++i) x(i, b) = row[i];
  }
  return x;
}

// Runs every layer over the whole sequence. An empty mask means all active.
StackRun run_stack(const std::vector<CellWeights>& layers, const TimescaleSchedule& schedule,
                   const std::vector<Matrix>& inputs, const std::vector<Mask>& masks,
                   std::vector<Matrix> h) {
  StackRun run;
  run.caches.resize(layers.size());
  for (auto& c : run.caches) c.reserve(inputs.size());
  run.top_h.reserve(inputs.size());
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const Matrix* below = &inputs[t];
    for (std::size_t k = 0; k < layers.size(); ++k) {
      StepResult step = mtgru_forward(*below, h[k], layers[k], schedule[k]);
      if (!masks.empty() && !masks[t].empty()) freeze_inactive_columns(step.h, step.cache, masks[t]);
      h[k] = std::move(step.h);
      run.caches[k].push_back(std::move(step.cache));
      below = &h[k];
    }
    run.top_h.push_back(h.back());
  }
  run.final_h = std::move(h);
  return run;
}

// Layer-major BPTT through a stack. `d_top` holds per-step gradients on the
// top layer's outputs (may be empty); `d_final` seeds each layer's carry.
// Returns per-step gradients on the stack inputs; d_init receives the
// gradient on each layer's initial state.
std::vector<Matrix> backward_stack(const std::vector<CellWeights>& layers, const StackRun& run,
                                   std::vector<Matrix> d_top, const std::vector<Matrix>& d_final,
                                   std::vector<CellWeights>& grads, std::vector<Matrix>& d_init) {
  d_init.resize(layers.size());
  std::vector<Matrix> d_above = std::move(d_top);
  for (std::size_t k = layers.size(); k-- > 0;) {
    UnrollGrads g = unroll_backward(d_final[k], run.caches[k], layers[k], d_above);
    grads[k] += g.d_w;
    d_init[k] = std::move(g.d_h0);
    d_above = std::move(g.d_x);
  }
  return d_above;
}

void accumulate_embedding_grad(Matrix& d_embedding, const std::vector<TokenId>& tokens,
                               const Matrix& d_x, const Mask& mask) {
  for (std::size_t b = 0; b < tokens.size(); ++b) {
    if (!mask.empty() && !mask[b]) continue;
    auto row = d_embedding.row(tokens[b]);
    for (std::size_t i = 0; i < row.size(); ++i) row[i] += d_x(i, b);
  }
}

struct DecoderPass {
  double loss_sum = 0.0;
  std::size_t tokens = 0;
  std::vector<Matrix> d_init;
};

void check_targets(const std::vector<TokenSeq>& targets, std::size_t vocab) {
  if (targets.empty()) throw std::invalid_argument("decoder: empty batch");
  const std::size_t len = targets.front().size();
  for (const TokenSeq& t : targets) {
    if (t.size() != len) throw std::invalid_argument("decoder: ragged target batch");
    if (t.size() < 2 || t.front() != kGo) {
      throw std::invalid_argument("decoder: target must begin with GO and end with EOS");
    }
    const auto eos = std::find(t.begin(), t.end(), kEos);
    if (eos == t.end()) throw std::invalid_argument("decoder: target has no EOS");
    for (auto it = eos + 1; it != t.end(); ++it)
      if (*it != kPad) throw std::invalid_argument("decoder: only PAD may follow EOS");
    for (TokenId id : t) check_token(id, vocab);
  }
}

// Teacher-forced decoder over a padded batch; accumulates into `grads` when non-null.
DecoderPass run_decoder(const Seq2SeqModel& model, const std::vector<Matrix>& init,
                        const std::vector<TokenSeq>& targets, Parameters* grads) {
  check_targets(targets, model.dims.vocab);
  const std::size_t batch = targets.size();
  const std::size_t steps = targets.front().size() - 1;

  std::vector<Matrix> inputs;
  std::vector<Mask> masks(steps, Mask(batch));
  std::vector<std::vector<TokenId>> step_tokens(steps, std::vector<TokenId>(batch));
  DecoderPass pass;
  for (std::size_t p = 0; p < steps; ++p) {
    for (std::size_t b = 0; b < batch; ++b) {
      step_tokens[p][b] = targets[b][p];
      masks[p][b] = targets[b][p + 1] != kPad;
      pass.tokens += masks[p][b];
    }
    inputs.push_back(embed_column_batch(model.params.embedding, step_tokens[p]));
  }
  StackRun run = run_stack(model.params.decoder, model.schedule, inputs, masks, init);

  const double scale = pass.tokens ? 1.0 / static_cast<double>(pass.tokens) : 0.0;
  std::vector<Matrix> d_top;
  if (grads) d_top.reserve(steps);
  std::vector<double> column(model.dims.vocab);
  for (std::size_t p = 0; p < steps; ++p) {
    const Matrix logits = matmul(model.params.projection, run.top_h[p]);
    Matrix d_logits(model.dims.vocab, batch);
    for (std::size_t b = 0; b < batch; ++b) {
      if (!masks[p][b]) continue;
      for (std::size_t v = 0; v < column.size(); ++v) column[v] = logits(v, b);
      const std::vector<double> probs = softmax(column);
      const TokenId gold = targets[b][p + 1];
      pass.loss_sum += cross_entropy(probs, gold);
      if (grads) {
        for (std::size_t v = 0; v < probs.size(); ++v) d_logits(v, b) = probs[v] * scale;
        d_logits(gold, b) -= scale;
      }
    }
    if (grads) {
      add_matmul_nt(grads->projection, d_logits, run.top_h[p]);
      d_top.push_back(matmul_tn(model.params.projection, d_logits));
    }
  }
  if (!grads) return pass;

  std::vector<Matrix> d_final;
  for (const Matrix& h : init) d_final.emplace_back(h.rows(), h.cols());
  std::vector<Matrix> d_inputs =
      backward_stack(model.params.decoder, run, std::move(d_top), d_final, grads->decoder, pass.d_init);
  for (std::size_t p = 0; p < steps; ++p)
    accumulate_embedding_grad(grads->embedding, step_tokens[p], d_inputs[p], masks[p]);
  return pass;
}

LossResult finish(const DecoderPass& pass) {
  LossResult r;
  r.loss_sum = pass.loss_sum;
  r.tokens = pass.tokens;
  r.loss = pass.tokens ? pass.loss_sum / static_cast<double>(pass.tokens) : 0.0;
  return r;
}

}  // namespace

std::vector<Matrix> encode(const Seq2SeqModel& model, const TokenSeq& source) {
  if (source.empty()) throw std::invalid_argument("encode: empty source sequence");
  // PAD positions are skipped, as in the masked batch path.
  std::vector<Matrix> inputs;
  inputs.reserve(source.size());
  for (TokenId id : source)
    if (id != kPad) inputs.push_back(embed_column_batch(model.params.embedding, {id}));
  if (inputs.empty()) throw std::invalid_argument("encode: source holds only padding");
  std::vector<Matrix> h0(model.dims.layers, Matrix(model.dims.hidden, 1));
  return run_stack(model.params.encoder, model.schedule, inputs, {}, std::move(h0)).final_h;
}

LossResult decode_train(const Seq2SeqModel& model, const std::vector<Matrix>& init_hidden,
                        const TokenSeq& target) {
  if (init_hidden.size() != model.dims.layers) {
    throw ShapeError("decode_train: " + std::to_string(init_hidden.size()) +
                     " initial states for " + std::to_string(model.dims.layers) + " layers");
  }
  Parameters grads = model.params.zeros_like();
  DecoderPass pass = run_decoder(model, init_hidden, {target}, &grads);
  LossResult r = finish(pass);
  r.grads = std::move(grads);
  r.d_init_hidden = std::move(pass.d_init);
  return r;
}

LossResult batch_loss(const Seq2SeqModel& model, const SequenceBatch& batch, bool with_grads) {
  if (batch.size() == 0 || batch.targets.size() != batch.size()) {
    throw std::invalid_argument("batch_loss: empty or inconsistent batch");
  }
  const std::size_t n = batch.size();
  const std::size_t src_len = batch.sources.front().size();
  std::vector<Matrix> inputs;
  std::vector<Mask> masks(src_len, Mask(n));
  std::vector<std::vector<TokenId>> step_tokens(src_len, std::vector<TokenId>(n));
  for (std::size_t b = 0; b < n; ++b) {
    if (batch.sources[b].size() != src_len) throw std::invalid_argument("batch_loss: ragged sources");
    if (std::all_of(batch.sources[b].begin(), batch.sources[b].end(),
                    [](TokenId id) { return id == kPad; })) {
      throw std::invalid_argument("batch_loss: empty source sequence");
    }
  }
  for (std::size_t t = 0; t < src_len; ++t) {
    for (std::size_t b = 0; b < n; ++b) {
      step_tokens[t][b] = batch.sources[b][t];
      masks[t][b] = batch.sources[b][t] != kPad;
    }
    inputs.push_back(embed_column_batch(model.params.embedding, step_tokens[t]));
  }
  std::vector<Matrix> h0(model.dims.layers, Matrix(model.dims.hidden, n));
  StackRun enc = run_stack(model.params.encoder, model.schedule, inputs, masks, std::move(h0));

  if (!with_grads) return finish(run_decoder(model, enc.final_h, batch.targets, nullptr));

  Parameters grads = model.params.zeros_like();
  DecoderPass pass = run_decoder(model, enc.final_h, batch.targets, &grads);
  std::vector<Matrix> d_h0;
  std::vector<Matrix> d_inputs =
      backward_stack(model.params.encoder, enc, {}, pass.d_init, grads.encoder, d_h0);
  for (std::size_t t = 0; t < src_len; ++t)
    accumulate_embedding_grad(grads.embedding, step_tokens[t], d_inputs[t], masks[t]);
  LossResult r = finish(pass);
  r.grads = std::move(grads);
  return r;
}

TokenSeq decode_greedy(const Seq2SeqModel& model, const std::vector<Matrix>& init_hidden,
                       std::size_t max_len) {
  if (init_hidden.size() != model.dims.layers) {
    throw ShapeError("decode_greedy: wrong number of initial states");
  }
  std::vector<Matrix> h = init_hidden;
  TokenSeq out;
  TokenId token = kGo;
  while (out.size() < max_len) {
    Matrix below = embed_column_batch(model.params.embedding, {token});
    for (std::size_t k = 0; k < h.size(); ++k) {
      h[k] = mtgru_forward(below, h[k], model.params.decoder[k], model.schedule[k]).h;
      below = h[k];
    }
    const Matrix logits = matmul(model.params.projection, h.back());
    // First maximum wins, so ties go to the lowest id.
    TokenId best = 0;
    for (std::size_t v = 1; v < logits.rows(); ++v)
      if (logits(v, 0) > logits(best, 0)) best = static_cast<TokenId>(v);
    if (best == kEos) break;
    out.push_back(best);
    token = best;
  }
  return out;
}

double perplexity(double mean_token_loss) { return std::exp(mean_token_loss); }

namespace {

// Extended-precision, one-example-at-a-time reference for the summed batch
// cross-entropy. Parameters are flattened in Parameters::named() order.
struct WideModel {
  const Seq2SeqModel* shape = nullptr;
  std::vector<std::vector<long double>> mats;
};

using WideVec = std::vector<long double>;

WideVec wide_cell_step(const WideModel& m, std::size_t first, const WideVec& x, const WideVec& h,
                       long double tau) {
  const std::size_t hid = h.size();
  auto dot = [&](std::size_t mat, std::size_t row, const WideVec& v) {
    long double acc = 0.0L;
    for (std::size_t k = 0; k < v.size(); ++k) acc += m.mats[first + mat][row * v.size() + k] * v[k];
    return acc;
  };
  WideVec r(hid), z(hid), rh(hid), out(hid);
  for (std::size_t i = 0; i < hid; ++i) {
    r[i] = 1.0L / (1.0L + std::exp(-(dot(0, i, x) + dot(3, i, h))));
    z[i] = 1.0L / (1.0L + std::exp(-(dot(1, i, x) + dot(4, i, h))));
  }
  for (std::size_t i = 0; i < hid; ++i) rh[i] = r[i] * h[i];
  for (std::size_t i = 0; i < hid; ++i) {
    const long double u = std::tanh(dot(2, i, x) + dot(5, i, rh));
    out[i] = ((1.0L - z[i]) * h[i] + z[i] * u) / tau + (1.0L - 1.0L / tau) * h[i];
  }
  return out;
}

WideVec wide_embedding(const WideModel& m, TokenId id) {
  const std::size_t e = m.shape->dims.embed;
  return WideVec(m.mats[0].begin() + static_cast<std::ptrdiff_t>(id * e),
                 m.mats[0].begin() + static_cast<std::ptrdiff_t>((id + 1) * e));
}

std::vector<WideVec> wide_stack_step(const WideModel& m, std::size_t first_layer_mat,
                                     WideVec input, std::vector<WideVec> state) {
  for (std::size_t k = 0; k < state.size(); ++k) {
    state[k] = wide_cell_step(m, first_layer_mat + 6 * k, input, state[k],
                              m.shape->schedule[k]);
    input = state[k];
  }
  return state;
}

long double wide_batch_loss(const WideModel& m, const SequenceBatch& batch) {
  const ModelDims& d = m.shape->dims;
  const std::size_t encoder_first = 1;
  const std::size_t decoder_first = 1 + 6 * d.layers;
  const std::vector<long double>& proj = m.mats.back();
  long double total = 0.0L;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    std::vector<WideVec> state(d.layers, WideVec(d.hidden, 0.0L));
    for (TokenId id : batch.sources[b])
      if (id != kPad) state = wide_stack_step(m, encoder_first, wide_embedding(m, id), state);
    const TokenSeq& target = batch.targets[b];
    for (std::size_t p = 0; p + 1 < target.size() && target[p + 1] != kPad; ++p) {
      state = wide_stack_step(m, decoder_first, wide_embedding(m, target[p]), state);
      WideVec logits(d.vocab, 0.0L);
      long double top = -std::numeric_limits<long double>::infinity();
      for (std::size_t v = 0; v < d.vocab; ++v) {
        for (std::size_t k = 0; k < d.hidden; ++k) logits[v] += proj[v * d.hidden + k] * state.back()[k];
        top = std::max(top, logits[v]);
      }
      long double norm = 0.0L;
      for (long double l : logits) norm += std::exp(l - top);
      total += std::log(norm) - (logits[target[p + 1]] - top);
    }
  }
  return total;
}

}  // namespace

double model_finite_diff_check(const Seq2SeqModel& model, const SequenceBatch& batch,
                               double epsilon) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-3)) {
    throw std::invalid_argument("model_finite_diff_check: epsilon must lie in [1e-7, 1e-3]");
  }
  const LossResult analytic = batch_loss(model, batch, true);
  // batch_loss reports gradients of the mean loss; rescale to the sum.
  const double scale = static_cast<double>(analytic.tokens);
  WideModel wide{&model, {}};
  for (const auto& p : model.params.named())
    wide.mats.emplace_back(p.matrix->values().begin(), p.matrix->values().end());
  const auto grads = analytic.grads.named();
  const long double step = epsilon;
  double worst = 0.0;
  for (std::size_t m = 0; m < wide.mats.size(); ++m) {
    for (std::size_t i = 0; i < wide.mats[m].size(); ++i) {
      long double& slot = wide.mats[m][i];
      const long double saved = slot;
      slot = saved + step;
      const long double plus = wide_batch_loss(wide, batch);
      slot = saved - step;
      const long double minus = wide_batch_loss(wide, batch);
      slot = saved;
      const double numeric = static_cast<double>((plus - minus) / (2.0L * step));
      worst = std::max(worst, relative_error(numeric, (*grads[m].matrix)[i] * scale));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Optimization

std::string_view optimizer_name(OptimizerConfig::Kind kind) {
  return kind == OptimizerConfig::Kind::Adam ? "adam" : "sgd";
}

OptimizerConfig::Kind parse_optimizer(std::string_view name) {
  if (name == "adam") return OptimizerConfig::Kind::Adam;
  if (name == "sgd") return OptimizerConfig::Kind::Sgd;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "' (adam|sgd)");
}

bool TrainState::operator==(const TrainState& other) const {
  return step == other.step && train_loss_ema == other.train_loss_ema &&
         dev_perplexity == other.dev_perplexity && adam_m == other.adam_m &&
         adam_v == other.adam_v && rng.state() == other.rng.state();
}

double clip_global_norm(Parameters& grads, double max_norm) {
  const double norm = std::sqrt(grads.squared_norm());
  if (norm > max_norm && norm > 0.0) grads *= max_norm / norm;
  return norm;
}

double train_step(Seq2SeqModel& model, TrainState& state, const SequenceBatch& batch,
                  const OptimizerConfig& opt) {
  LossResult r = batch_loss(model, batch, true);
  if (!std::isfinite(r.loss) || !r.grads.all_finite()) {
    throw NumericalError("non-finite loss or gradient at step " + std::to_string(state.step + 1));
  }
  clip_global_norm(r.grads, opt.clip_norm);

  auto params = model.params.named();
  auto grads = r.grads.named();
  if (opt.kind == OptimizerConfig::Kind::Sgd) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      Matrix& p = *params[i].matrix;
      const Matrix& g = *grads[i].matrix;
      for (std::size_t j = 0; j < p.size(); ++j) p[j] -= opt.learning_rate * g[j];
    }
  } else {
    if (state.adam_m.embedding.empty()) {
      state.adam_m = model.params.zeros_like();
      state.adam_v = model.params.zeros_like();
    }
    auto ms = state.adam_m.named();
    auto vs = state.adam_v.named();
    const double t = static_cast<double>(state.step + 1);
    const double c1 = 1.0 - std::pow(opt.beta1, t);
    const double c2 = 1.0 - std::pow(opt.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
      Matrix& p = *params[i].matrix;
      Matrix& m = *ms[i].matrix;
      Matrix& v = *vs[i].matrix;
      const Matrix& g = *grads[i].matrix;
      for (std::size_t j = 0; j < p.size(); ++j) {
        m[j] = opt.beta1 * m[j] + (1.0 - opt.beta1) * g[j];
        v[j] = opt.beta2 * v[j] + (1.0 - opt.beta2) * g[j] * g[j];
        p[j] -= opt.learning_rate * (m[j] / c1) / (std::sqrt(v[j] / c2) + opt.epsilon);
      }
    }
  }
  state.train_loss_ema = state.step == 0 ? r.loss : 0.9 * state.train_loss_ema + 0.1 * r.loss;
  ++state.step;
  return r.loss;
}

}  // namespace mtgru
