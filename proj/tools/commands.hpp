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

// Command implementations behind the `mtgru` executable. Every command writes
// progress to `out`, diagnostics to `err`, and returns a process exit code.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mtgru/cells.hpp"
#include "mtgru/rouge.hpp"
#include "run_config.hpp"

namespace mtgru::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitNumerical = 2;

/// Parses `args` (without the program name) and dispatches to a command.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct PrepareOptions {
  std::filesystem::path input_dir;
  std::filesystem::path manifest;
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> config;
};
int cmd_prepare(const PrepareOptions& opts, std::ostream& out, std::ostream& err);

/// One randomized cell configuration for gradient checking.
struct CellTrial {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::size_t columns = 0;
  double tau = 1.0;
  CellWeights weights;
  Matrix x;
  Matrix h_prev;
};
/// Dims in [3, 8], 1 to 3 batch columns, τ from {1, 1.25, 1.5, 1.7, 2.5}.
CellTrial random_cell_trial(Rng& rng);

inline constexpr double kCellGradTolerance = 1e-6;
inline constexpr double kModelGradTolerance = 1e-5;

struct GradcheckOptions {
  std::uint64_t seed = 1;
  std::size_t trials = 50;
  bool flip_leak_sign = false;  // fault injection for testing the checker
};
int cmd_gradcheck(const GradcheckOptions& opts, std::ostream& out, std::ostream& err);

struct TrainOptions {
  std::optional<std::filesystem::path> config;
  std::filesystem::path pairs;
  std::filesystem::path out_ckpt;
  std::optional<std::filesystem::path> log;  // defaults to <out_ckpt>.log.csv
  std::vector<std::pair<std::string, std::string>> overrides;  // key, value
};
int cmd_train(const TrainOptions& opts, std::ostream& out, std::ostream& err);

struct CompareTauOptions {
  std::optional<std::filesystem::path> config;
  std::filesystem::path pairs;
  std::filesystem::path out_dir;
  std::vector<std::pair<std::string, std::string>> overrides;
};
int cmd_compare_tau(const CompareTauOptions& opts, std::ostream& out, std::ostream& err);

struct SummarizeOptions {
  std::filesystem::path ckpt;
  std::filesystem::path article;
  std::filesystem::path out;
  std::size_t max_len = 0;  // 0: largest bucket target length minus EOS
};
int cmd_summarize(const SummarizeOptions& opts, std::ostream& out, std::ostream& err);

struct EvaluateOptions {
  std::filesystem::path generated_dir;
  std::filesystem::path gold_dir;
  std::filesystem::path out_csv;
};
int cmd_evaluate(const EvaluateOptions& opts, std::ostream& out, std::ostream& err);

struct MakeToyOptions {
  std::string task = "copy";
  std::size_t count = 2000;
  std::size_t vocab = 20;
  std::size_t max_len = 8;
  std::uint64_t seed = 1;
  std::filesystem::path out;
};
int cmd_make_toy(const MakeToyOptions& opts, std::ostream& out, std::ostream& err);

/// Paragraph summaries from a generated file: either `summarize` output
/// (index, status, text per line) or plain one-summary-per-line text.
std::vector<std::string> read_generated_summaries(const std::filesystem::path& path);

/// Per-article rows then MEAN rows, columns doc_id,metric,recall,precision,f_score.
void write_rouge_csv(std::ostream& out, const std::vector<std::string>& doc_ids,
                     const std::vector<RougeReport>& reports);

}  // namespace mtgru::cli
