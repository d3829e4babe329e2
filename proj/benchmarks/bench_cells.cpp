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

#include <benchmark/benchmark.h>

#include "mtgru/cells.hpp"
#include "mtgru/seq2seq.hpp"
#include "mtgru/training.hpp"

using namespace mtgru;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-1.0, 1.0);
  return m;
}

void BM_MtgruForward(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const CellWeights w = CellWeights::random(hidden, hidden, rng);
  const Matrix x = random_matrix(hidden, 32, rng), h = random_matrix(hidden, 32, rng);
  for (auto _ : state) benchmark::DoNotOptimize(mtgru_forward(x, h, w, 1.5));
}
BENCHMARK(BM_MtgruForward)->Arg(32)->Arg(64)->Arg(128);

void BM_MtgruBackward(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const CellWeights w = CellWeights::random(hidden, hidden, rng);
  const StepResult step = mtgru_forward(random_matrix(hidden, 32, rng), random_matrix(hidden, 32, rng), w, 1.5);
  const Matrix d = random_matrix(hidden, 32, rng);
  for (auto _ : state) benchmark::DoNotOptimize(mtgru_backward(d, step.cache, w));
}
BENCHMARK(BM_MtgruBackward)->Arg(32)->Arg(64)->Arg(128);

void BM_TrainStepToy(benchmark::State& state) {
  Rng data(3);
  const auto examples = make_toy_examples(ToyTask::Copy, 32, 20, 8, data);
  Rng init(4);
  Seq2SeqModel model = Seq2SeqModel::create(ModelDims{20, 32, 64, 2}, TimescaleSchedule({1.0, 1.5}), init);
  const SequenceBatch batch = make_batch(examples, Bucket{8, 9}, true);
  TrainState ts;
  const OptimizerConfig opt;
  for (auto _ : state) benchmark::DoNotOptimize(train_step(model, ts, batch, opt));
}
BENCHMARK(BM_TrainStepToy)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
