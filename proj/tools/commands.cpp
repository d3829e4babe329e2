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

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "mtgru/checkpoint.hpp"
#include "mtgru/corpus.hpp"
#include "mtgru/training.hpp"

namespace mtgru::cli {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
  if (!f.flush()) throw std::runtime_error("failed writing " + path.string());
}

RunConfig resolve_config(const std::optional<fs::path>& path,
                         const std::vector<std::pair<std::string, std::string>>& overrides) {
  RunConfig cfg = path ? load_config(*path) : RunConfig{};
  apply_seed_env(cfg);
  for (const auto& [key, value] : overrides) apply_setting(cfg, key, value);
  cfg.validate();
  return cfg;
}

void require_parent_dir(const fs::path& file) {
  const fs::path parent = file.has_parent_path() ? file.parent_path() : fs::path(".");
  if (!fs::is_directory(parent)) {
    throw ConfigError("output directory " + parent.string() + " does not exist");
  }
}

std::vector<TrainingPair> load_pairs(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read pair file " + path.string());
  std::vector<TrainingPair> pairs;
  try {
    pairs = read_pairs(in);
  } catch (const std::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (pairs.empty()) throw ConfigError("pair file " + path.string() + " is empty");
  return pairs;
}

std::vector<Example> to_examples(const std::vector<TrainingPair>& pairs, const Vocabulary& vocab) {
  std::vector<Example> out;
  out.reserve(pairs.size());
  for (const TrainingPair& p : pairs) out.push_back({vocab.encode(p.source), vocab.encode(p.target)});
  return out;
}

struct SplitPairs {
  std::vector<TrainingPair> train, dev, test;
};

SplitPairs split_pairs(const std::vector<TrainingPair>& pairs, std::uint64_t seed) {
  SplitPairs s;
  for (const TrainingPair& p : pairs) {
    switch (split_of(p.doc_id, seed)) {
      case Split::Train: s.train.push_back(p); break;
      case Split::Dev: s.dev.push_back(p); break;
      case Split::Test: s.test.push_back(p); break;
    }
  }
  return s;
}

Vocabulary vocab_from_pairs(const std::vector<TrainingPair>& pairs, std::size_t max_size) {
  std::vector<Tokens> streams;
  streams.reserve(2 * pairs.size());
  for (const TrainingPair& p : pairs) {
    streams.push_back(p.source);
    streams.push_back(p.target);
  }
  return build_vocab(streams, max_size);
}

struct TrainRun {
  int exit_code = kExitOk;
  TrainOutcome outcome;
};

// Shared by train and compare-tau. `cfg` is already validated.
TrainRun train_and_save(const RunConfig& cfg, const std::vector<TrainingPair>& pairs,
                        const fs::path& ckpt_path, const fs::path& log_path, std::ostream& out,
                        std::ostream& err) {
  SplitPairs split = split_pairs(pairs, cfg.seed);
  if (split.train.empty()) {
    throw ConfigError("no article fell into the training split; add articles or change the seed");
  }
  if (split.dev.empty()) {
    err << "warning: dev split is empty; dev perplexity is measured on the training split\n";
    split.dev = split.train;
  }
  const Vocabulary vocab = vocab_from_pairs(split.train, cfg.vocab_size);
  const std::vector<Example> train_set = to_examples(split.train, vocab);
  const std::vector<Example> dev_set = to_examples(split.dev, vocab);

  TrainConfig tc = cfg.train_config();
  tc.dims.vocab = vocab.size();

  std::ofstream log(log_path, std::ios::binary | std::ios::trunc);
  if (!log) throw std::runtime_error("cannot write log " + log_path.string());
  log << kLogHeader << '\n';

  Checkpoint ckpt;
  ckpt.vocab = vocab.tokens();
  ckpt.buckets = cfg.buckets;
  ckpt.reverse_source = cfg.reverse_source;
  bool saved = false;
  auto save = [&](const Seq2SeqModel& model, const TrainState& state) {
    ckpt.model = model;
    ckpt.state = state;
    save_checkpoint(ckpt, ckpt_path);
    saved = true;
  };

  TrainHooks hooks;
  hooks.on_log = [&](const LogRow& row) {
    write_log_row(log, row, cfg.log_wall_clock);
    log.flush();
    out << "step " << row.step << "  train_loss " << fixed(row.train_loss, 4) << "  dev_ppl "
        << fixed(row.dev_ppl, 3) << '\n';
  };
  hooks.on_best = save;

  out << "training " << tc.dims.layers << "x" << tc.dims.hidden << " schedule "
      << tc.schedule.to_string() << " on " << train_set.size() << " pairs (" << dev_set.size()
      << " dev), vocab " << vocab.size() << '\n';
  TrainRun run;
  run.outcome = train(tc, train_set, dev_set, hooks);
  const TrainOutcome& o = run.outcome;
  if (o.overflow) out << "skipped " << o.overflow << " pairs longer than the largest bucket\n";
  if (!saved) save(o.best_model, o.best_state);

  if (o.diverged) {
    err << "error: training diverged at step " << o.last_state.step << ": " << o.error
        << "; last good checkpoint kept at " << ckpt_path.string() << '\n';
    run.exit_code = kExitNumerical;
    return run;
  }
  out << "best dev perplexity " << fixed(o.best_dev_ppl, 4) << " at step " << o.best_step << '\n';
  if (!split.test.empty()) {
    const std::vector<Example> test_set = to_examples(split.test, vocab);
    out << "test perplexity " << fixed(dataset_perplexity(o.best_model, test_set, tc.buckets,
                                                         tc.batch_size, tc.reverse_source), 4)
        << '\n';
  }
  out << "checkpoint " << ckpt_path.string() << '\n';
  return run;
}

bool parse_summary_line(const std::string& line, std::string& text) {
  const auto t1 = line.find('\t');
  if (t1 == std::string::npos || t1 == 0) return false;
  if (!std::all_of(line.begin(), line.begin() + static_cast<std::ptrdiff_t>(t1),
                   [](char c) { return c >= '0' && c <= '9'; })) {
    return false;
  }
  const auto t2 = line.find('\t', t1 + 1);
  if (t2 == std::string::npos) return false;
  const std::string status = line.substr(t1 + 1, t2 - t1 - 1);
  if (status != "ok" && status != "truncated") return false;
  text = line.substr(t2 + 1);
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_prepare(const PrepareOptions& opts, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::vector<std::string> entries;
  try {
    cfg = resolve_config(opts.config, {});
    if (!fs::is_directory(opts.input_dir)) {
      throw ConfigError("input directory " + opts.input_dir.string() + " does not exist");
    }
    std::ifstream manifest(opts.manifest);
    if (!manifest) throw ConfigError("cannot read manifest " + opts.manifest.string());
    entries = read_manifest(manifest);
    if (entries.empty()) throw ConfigError("manifest " + opts.manifest.string() + " lists no articles");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  std::vector<DocumentRecord> docs;
  std::set<std::string> seen;
  std::size_t failures = 0;
  for (const std::string& entry : entries) {
    const fs::path path = opts.input_dir / entry;
    const std::string doc_id = path.stem().string();
    if (!seen.insert(doc_id).second) {
      err << "error: " << entry << ": duplicate document id '" << doc_id << "'\n";
      ++failures;
      continue;
    }
    try {
      docs.push_back(extract_sections(read_text_file(path), doc_id));
    } catch (const std::exception& e) {
      err << "error: " << entry << ": " << e.what() << '\n';
      ++failures;
    }
  }
  if (docs.empty()) {
    err << "error: no article could be processed\n";
    return kExitInput;
  }

  const CorpusStats stats = build_stats(docs, cfg.idf_unit);
  const PairSet pairs = make_pairs(docs, stats, cfg.buckets);
  SplitPairs split = split_pairs(pairs.pairs, cfg.seed);
  const Vocabulary vocab =
      vocab_from_pairs(split.train.empty() ? pairs.pairs : split.train, cfg.vocab_size);

  try {
    fs::create_directories(opts.out_dir / "abstracts");
    std::ostringstream pair_text, stats_text, vocab_text, split_text;
    write_pairs(pair_text, pairs.pairs);
    write_stats(stats_text, stats);
    write_vocab(vocab_text, vocab);
    for (const DocumentRecord& d : docs) {
      split_text << d.doc_id << '\t' << split_name(split_of(d.doc_id, cfg.seed)) << '\n';
      write_file(opts.out_dir / "abstracts" / (d.doc_id + ".txt"), d.abstract_text + "\n");
    }
    write_file(opts.out_dir / "pairs.tsv", pair_text.str());
    write_file(opts.out_dir / "stats.tsv", stats_text.str());
    write_file(opts.out_dir / "vocab.txt", vocab_text.str());
    write_file(opts.out_dir / "splits.tsv", split_text.str());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  out << "documents " << docs.size() << '\n'
      << "paragraphs " << pairs.paragraphs << '\n'
      << "pairs " << pairs.pairs.size() << '\n'
      << "overflow " << pairs.overflow << '\n'
      << "extraction_failures " << failures << '\n'
      << "vocab " << vocab.size() << '\n';
  return kExitOk;
}

CellTrial random_cell_trial(Rng& rng) {
  static constexpr double kTaus[] = {1.0, 1.25, 1.5, 1.7, 2.5};
  CellTrial t;
  t.input_dim = 3 + rng.uniform_index(6);
  t.hidden_dim = 3 + rng.uniform_index(6);
  t.columns = 1 + rng.uniform_index(3);
  t.tau = kTaus[rng.uniform_index(5)];
  t.weights = CellWeights::random(t.input_dim, t.hidden_dim, rng);
  t.x = Matrix(t.input_dim, t.columns);
  t.h_prev = Matrix(t.hidden_dim, t.columns);
  for (double& v : t.x.values()) v = rng.uniform(-1.0, 1.0);
  for (double& v : t.h_prev.values()) v = rng.uniform(-0.9, 0.9);
  return t;
}

int cmd_gradcheck(const GradcheckOptions& opts, std::ostream& out, std::ostream& err) {
  if (opts.trials == 0) {
    err << "error: --trials must be at least 1\n";
    return kExitInput;
  }
  BackwardTerms terms;
  terms.negate_leak = opts.flip_leak_sign;
  Rng rng(opts.seed);
  std::size_t failed = 0;
  for (std::size_t i = 0; i < opts.trials; ++i) {
    const CellTrial t = random_cell_trial(rng);
    const double e = finite_diff_check(t.weights, t.x, t.h_prev, t.tau, 1e-5, terms);
    const bool ok = e <= kCellGradTolerance;
    failed += !ok;
    out << "trial " << i << " input " << t.input_dim << " hidden " << t.hidden_dim << " batch "
        << t.columns << " tau " << t.tau << " max_rel_error " << sci(e) << (ok ? " ok" : " FAIL")
        << '\n';
  }

  Rng model_rng(opts.seed ^ 0xE2E0000000000001ULL);
  const Seq2SeqModel model = Seq2SeqModel::create(ModelDims{6, 4, 5, 2},
                                                  TimescaleSchedule({1.0, 1.5}), model_rng);
  const std::vector<Example> examples = make_toy_examples(ToyTask::Reverse, 3, 6, 3, model_rng);
  const SequenceBatch batch = make_batch(examples, Bucket{3, 4}, false);
  const double e2e = model_finite_diff_check(model, batch);
  const bool e2e_ok = e2e <= kModelGradTolerance;
  out << "end-to-end vocab 6 embed 4 hidden 5 layers 2 tau 1,1.5 max_rel_error " << sci(e2e)
      << (e2e_ok ? " ok" : " FAIL") << '\n';

  if (failed || !e2e_ok) {
    err << "gradient check failed: " << failed << " of " << opts.trials << " cell trials above "
        << kCellGradTolerance << (e2e_ok ? "" : ", end-to-end above 1e-5") << '\n';
    return kExitNumerical;
  }
  out << "all gradient checks passed\n";
  return kExitOk;
}

int cmd_train(const TrainOptions& opts, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::vector<TrainingPair> pairs;
  const fs::path log_path = opts.log ? *opts.log : fs::path(opts.out_ckpt.string() + ".log.csv");
  try {
    cfg = resolve_config(opts.config, opts.overrides);
    pairs = load_pairs(opts.pairs);
    require_parent_dir(opts.out_ckpt);
    require_parent_dir(log_path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  if (TimescaleSchedule::is_fixed_length_preset(cfg.schedule) && cfg.layers != 4) {
    err << "note: schedule " << cfg.schedule << " uses 4 layers (config says " << cfg.layers << ")\n";
  }
  try {
    return train_and_save(cfg, pairs, opts.out_ckpt, log_path, out, err).exit_code;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

int cmd_compare_tau(const CompareTauOptions& opts, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::vector<TrainingPair> pairs;
  try {
    cfg = resolve_config(opts.config, opts.overrides);
    pairs = load_pairs(opts.pairs);
    if (!fs::is_directory(opts.out_dir)) fs::create_directories(opts.out_dir);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  // Identical step grids: early stopping off, four layers for every preset.
  cfg.patience = 0;
  cfg.layers = 4;
  std::vector<std::pair<std::string, double>> finals;
  for (const std::string name : {"mtgru-1", "mtgru-2", "mtgru-3"}) {
    RunConfig run_cfg = cfg;
    run_cfg.schedule = name;
    out << "== " << name << '\n';
    try {
      const TrainRun run = train_and_save(run_cfg, pairs, opts.out_dir / (name + ".ckpt"),
                                          opts.out_dir / (name + ".log.csv"), out, err);
      if (run.exit_code != kExitOk) return run.exit_code;
      finals.emplace_back(name, run.outcome.log.empty() ? std::nan("") : run.outcome.log.back().train_loss);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitInput;
    }
  }
  out << "final train loss:";
  for (const auto& [name, loss] : finals) out << ' ' << name << '=' << fixed(loss, 4);
  out << '\n';
  std::stable_sort(finals.begin(), finals.end(),
                   [](const auto& a, const auto& b) { return a.second < b.second; });
  out << "ordering (lowest first):";
  for (const auto& f : finals) out << ' ' << f.first;
  out << '\n';
  return kExitOk;
}

int cmd_summarize(const SummarizeOptions& opts, std::ostream& out, std::ostream& err) {
  Checkpoint ckpt;
  DocumentRecord doc;
  try {
    ckpt = load_checkpoint(opts.ckpt);
    if (ckpt.vocab.empty()) throw ConfigError("checkpoint " + opts.ckpt.string() + " has no vocabulary");
    doc = extract_sections(read_text_file(opts.article), opts.article.stem().string());
    require_parent_dir(opts.out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  const Vocabulary vocab(ckpt.vocab);
  const Bucket& largest = ckpt.buckets.back();
  const std::size_t max_len = opts.max_len ? opts.max_len : largest.max_target_len - 1;

  std::ostringstream lines;
  std::vector<std::string> summaries;
  std::size_t truncated = 0;
  for (std::size_t i = 0; i < doc.intro_paragraphs.size(); ++i) {
    Tokens tokens = tokenize(doc.intro_paragraphs[i]);
    const bool cut = tokens.size() > largest.max_source_len;
    if (cut) {
      tokens.resize(largest.max_source_len);
      ++truncated;
    }
    TokenSeq ids = vocab.encode(tokens);
    if (ckpt.reverse_source) std::reverse(ids.begin(), ids.end());
    const TokenSeq decoded = decode_greedy(ckpt.model, encode(ckpt.model, ids), max_len);
    summaries.push_back(join_tokens(vocab.decode(decoded)));
    lines << i << '\t' << (cut ? "truncated" : "ok") << '\t' << summaries.back() << '\n';
  }
  std::string concat;
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    if (i && !summaries[i].empty() && !concat.empty()) concat += ' ';
    concat += summaries[i];
  }
  try {
    write_file(opts.out, lines.str());
    write_file(opts.out.string() + ".concat", concat + "\n");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  out << "summarized " << summaries.size() << " paragraphs (" << truncated << " truncated) to "
      << opts.out.string() << '\n';
  return kExitOk;
}

std::vector<std::string> read_generated_summaries(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string text;
    out.push_back(parse_summary_line(line, text) ? text : line);
  }
  if (out.empty()) out.emplace_back();
  return out;
}

void write_rouge_csv(std::ostream& out, const std::vector<std::string>& doc_ids,
                     const std::vector<RougeReport>& reports) {
  auto rows = [&](const std::string& id, const RougeReport& r) {
    const std::pair<const char*, const RougeScore*> metrics[] = {
        {"ROUGE-1", &r.rouge1}, {"ROUGE-2", &r.rouge2}, {"ROUGE-L", &r.rougeL}};
    for (const auto& [name, s] : metrics) {
      out << id << ',' << name << ',' << fixed(s->recall, 9) << ',' << fixed(s->precision, 9) << ','
          << fixed(s->f_score, 9) << '\n';
    }
  };
  out << "doc_id,metric,recall,precision,f_score\n";
  for (std::size_t i = 0; i < reports.size(); ++i) rows(doc_ids[i], reports[i]);
  rows("MEAN", mean_report(reports));
}

int cmd_evaluate(const EvaluateOptions& opts, std::ostream& out, std::ostream& err) {
  if (!fs::is_directory(opts.gold_dir) || !fs::is_directory(opts.generated_dir)) {
    err << "error: --gold and --generated must be existing directories\n";
    return kExitInput;
  }
  try {
    require_parent_dir(opts.out_csv);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  std::vector<fs::path> gold_files;
  for (const auto& entry : fs::directory_iterator(opts.gold_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".txt") gold_files.push_back(entry.path());
  std::sort(gold_files.begin(), gold_files.end());

  std::vector<std::string> ids;
  std::vector<RougeReport> reports;
  std::vector<std::string> skipped;
  for (const fs::path& gold : gold_files) {
    const std::string id = gold.stem().string();
    const fs::path generated = opts.generated_dir / (id + ".txt");
    if (!fs::exists(generated)) {
      skipped.push_back(id);
      continue;
    }
    try {
      reports.push_back(evaluate_article(read_generated_summaries(generated), read_text_file(gold)));
      ids.push_back(id);
    } catch (const std::exception& e) {
      err << "warning: " << id << ": " << e.what() << '\n';
      skipped.push_back(id);
    }
  }
  for (const auto& entry : fs::directory_iterator(opts.generated_dir)) {
    const std::string id = entry.path().stem().string();
    if (entry.path().extension() == ".txt" && !fs::exists(opts.gold_dir / (id + ".txt"))) {
      skipped.push_back(id);
    }
  }
  std::sort(skipped.begin(), skipped.end());
  for (const std::string& id : skipped) err << "skipped unmatched document " << id << '\n';
  if (reports.empty()) {
    err << "error: no document could be evaluated\n";
    return kExitInput;
  }

  std::ostringstream csv;
  write_rouge_csv(csv, ids, reports);
  try {
    write_file(opts.out_csv, csv.str());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  const RougeReport mean = mean_report(reports);
  out << "evaluated " << reports.size() << " documents (" << skipped.size() << " skipped)\n"
      << "mean F  ROUGE-1 " << fixed(mean.rouge1.f_score, 5) << "  ROUGE-2 "
      << fixed(mean.rouge2.f_score, 5) << "  ROUGE-L " << fixed(mean.rougeL.f_score, 5) << '\n';
  return kExitOk;
}

int cmd_make_toy(const MakeToyOptions& opts, std::ostream& out, std::ostream& err) {
  ToyTask task;
  if (opts.task == "copy") task = ToyTask::Copy;
  else if (opts.task == "reverse") task = ToyTask::Reverse;
  else {
    err << "error: --task must be copy or reverse\n";
    return kExitInput;
  }
  std::vector<Example> examples;
  try {
    require_parent_dir(opts.out);
    Rng rng(opts.seed);
    examples = make_toy_examples(task, opts.count, opts.vocab, opts.max_len, rng);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  std::vector<TrainingPair> pairs;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "toy-%06zu", i);
    TrainingPair p{id, 0, {}, {}};
    for (TokenId t : examples[i].source) p.source.push_back("s" + std::to_string(t));
    for (TokenId t : examples[i].target) p.target.push_back("s" + std::to_string(t));
    pairs.push_back(std::move(p));
  }
  std::ostringstream text;
  write_pairs(text, pairs);
  try {
    write_file(opts.out, text.str());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  out << "wrote " << pairs.size() << ' ' << opts.task << " pairs to " << opts.out.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiple-timescale GRU sequence-to-sequence toolkit", "mtgru"};
  app.require_subcommand(1);
  int code = kExitOk;

  auto collect_overrides = [](const std::vector<std::string>& sets, auto& overrides) {
    for (const std::string& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected KEY=VALUE, got " + s);
      overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
  };

  PrepareOptions prep;
  std::string prep_config;
  auto* prepare = app.add_subcommand("prepare", "Build training pairs from LaTeX articles");
  prepare->add_option("--input", prep.input_dir, "Directory holding the .tex files")->required();
  prepare->add_option("--manifest", prep.manifest, "File listing one article per line")->required();
  prepare->add_option("--out", prep.out_dir, "Output directory")->required();
  prepare->add_option("--config", prep_config, "Run configuration file");
  prepare->callback([&] {
    if (!prep_config.empty()) prep.config = prep_config;
    code = cmd_prepare(prep, out, err);
  });

  GradcheckOptions gc;
  std::string fault;
  auto* gradcheck = app.add_subcommand("gradcheck", "Verify analytic gradients against finite differences");
  gradcheck->add_option("--seed", gc.seed, "Random seed")->capture_default_str();
  gradcheck->add_option("--trials", gc.trials, "Number of random cell configurations")->capture_default_str();
  gradcheck->add_option("--inject-fault", fault)->group("");
  gradcheck->callback([&] {
    if (!fault.empty() && fault != "leak-sign") throw CLI::ValidationError("--inject-fault", "unknown fault " + fault);
    gc.flip_leak_sign = fault == "leak-sign";
    code = cmd_gradcheck(gc, out, err);
  });

  TrainOptions tr;
  std::string tr_config, tr_log, tr_schedule;
  std::vector<std::string> tr_sets;
  auto* train_cmd = app.add_subcommand("train", "Train a model and keep the best-dev checkpoint");
  train_cmd->add_option("--config", tr_config, "Run configuration file");
  train_cmd->add_option("--pairs", tr.pairs, "Pair file from prepare or make-toy")->required();
  train_cmd->add_option("--out", tr.out_ckpt, "Checkpoint path")->required();
  train_cmd->add_option("--schedule", tr_schedule, "gru, mtgru-1, mtgru-2, mtgru-3 or a tau list");
  train_cmd->add_option("--log", tr_log, "Training log CSV (default: <out>.log.csv)");
  train_cmd->add_option("--set", tr_sets, "Override a config key, KEY=VALUE");
  train_cmd->callback([&] {
    if (!tr_config.empty()) tr.config = tr_config;
    if (!tr_log.empty()) tr.log = tr_log;
    collect_overrides(tr_sets, tr.overrides);
    if (!tr_schedule.empty()) {
      if (TimescaleSchedule::is_fixed_length_preset(tr_schedule)) tr.overrides.emplace_back("layers", "4");
      else if (tr_schedule != "gru") {
        tr.overrides.emplace_back("layers", std::to_string(std::count(tr_schedule.begin(), tr_schedule.end(), ',') + 1));
      }
      tr.overrides.emplace_back("schedule", tr_schedule);
    }
    code = cmd_train(tr, out, err);
  });

  CompareTauOptions ct;
  std::string ct_config;
  std::vector<std::string> ct_sets;
  auto* compare = app.add_subcommand("compare-tau", "Train the mtgru-1/2/3 presets on identical data");
  compare->add_option("--config", ct_config, "Run configuration file");
  compare->add_option("--pairs", ct.pairs, "Pair file")->required();
  compare->add_option("--out", ct.out_dir, "Output directory")->required();
  compare->add_option("--set", ct_sets, "Override a config key, KEY=VALUE");
  compare->callback([&] {
    if (!ct_config.empty()) ct.config = ct_config;
    collect_overrides(ct_sets, ct.overrides);
    code = cmd_compare_tau(ct, out, err);
  });

  SummarizeOptions sm;
  auto* summarize = app.add_subcommand("summarize", "Summarize each Introduction paragraph of an article");
  summarize->add_option("--ckpt", sm.ckpt, "Checkpoint")->required();
  summarize->add_option("--article", sm.article, "LaTeX article")->required();
  summarize->add_option("--out", sm.out, "Per-paragraph output; <out>.concat gets the joined summary")->required();
  summarize->add_option("--max-len", sm.max_len, "Decode length limit (0: from the largest bucket)");
  summarize->callback([&] { code = cmd_summarize(sm, out, err); });

  EvaluateOptions ev;
  auto* evaluate = app.add_subcommand("evaluate", "ROUGE-1/2/L of generated summaries against gold abstracts");
  evaluate->add_option("--generated", ev.generated_dir, "Directory of <doc_id>.txt summaries")->required();
  evaluate->add_option("--gold", ev.gold_dir, "Directory of <doc_id>.txt abstracts")->required();
  evaluate->add_option("--out", ev.out_csv, "Report CSV")->required();
  evaluate->callback([&] { code = cmd_evaluate(ev, out, err); });

  MakeToyOptions toy;
  auto* make_toy = app.add_subcommand("make-toy", "Write a copy or reversal task as a pair file");
  make_toy->add_option("--task", toy.task, "copy or reverse")->capture_default_str();
  make_toy->add_option("--count", toy.count, "Number of pairs")->capture_default_str();
  make_toy->add_option("--vocab", toy.vocab, "Vocabulary size including 4 specials")->capture_default_str();
  make_toy->add_option("--max-len", toy.max_len, "Maximum sequence length")->capture_default_str();
  make_toy->add_option("--seed", toy.seed, "Random seed")->capture_default_str();
  make_toy->add_option("--out", toy.out, "Pair file")->required();
  make_toy->callback([&] { code = cmd_make_toy(toy, out, err); });

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitInput;
  }
  return code;
}

}  // namespace mtgru::cli
