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

#include "mtgru/checkpoint.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace mtgru {

namespace {

std::string buckets_to_string(const std::vector<Bucket>& buckets) {
  std::string out;
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(buckets[i].max_source_len) + ":" +
           std::to_string(buckets[i].max_target_len);
  }
  return out;
}

std::vector<Bucket> parse_bucket_list(const std::string& text) {
  std::vector<Bucket> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("bad bucket '" + item + "'");
    out.push_back({std::stoul(item.substr(0, colon)), std::stoul(item.substr(colon + 1))});
  }
  return out;
}

class SectionReader {
 public:
  explicit SectionReader(std::istream& in) : in_(in) {}

  std::string next_line(const std::string& section) {
    std::string line;
    if (!std::getline(in_, line)) throw CheckpointError("checkpoint truncated in section " + section);
    return line;
  }

  void expect_header(const std::string& header) {
    const std::string line = next_line(header);
    if (line != header) {
      throw CheckpointError("expected section " + header + ", found '" + line + "'");
    }
  }

  // Reads "key value" lines until `count` keys are collected.
  std::map<std::string, std::string> key_values(const std::string& section, std::size_t count) {
    std::map<std::string, std::string> kv;
    for (std::size_t i = 0; i < count; ++i) {
      const std::string line = next_line(section);
      const auto space = line.find(' ');
      if (space == std::string::npos) {
        throw CheckpointError("section " + section + ": malformed line '" + line + "'");
      }
      kv[line.substr(0, space)] = line.substr(space + 1);
    }
    return kv;
  }

  Matrix matrix(const std::string& section, const Matrix& like) {
    expect_header(section);
    Matrix m;
    try {
      m = read_matrix(in_);
    } catch (const std::exception& e) {
      throw CheckpointError("section " + section + ": " + e.what());
    }
    if (!m.same_shape(like)) {
      throw CheckpointError("section " + section + ": shape " + m.shape_string() + ", expected " +
                            like.shape_string());
    }
    return m;
  }

 private:
  std::istream& in_;
};

const std::string& require(const std::map<std::string, std::string>& kv, const std::string& key,
                           const std::string& section) {
  auto it = kv.find(key);
  if (it == kv.end()) throw CheckpointError("section " + section + ": missing key " + key);
  return it->second;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  const Seq2SeqModel& m = ckpt.model;
  m.validate();
  out << kCheckpointMagic << '\n';
  out << "[config]\n";
  out << "vocab_size " << m.dims.vocab << '\n';
  out << "embed_dim " << m.dims.embed << '\n';
  out << "hidden_dim " << m.dims.hidden << '\n';
  out << "layers " << m.dims.layers << '\n';
  out << "schedule " << m.schedule.to_string() << '\n';
  out << "reverse_source " << (ckpt.reverse_source ? 1 : 0) << '\n';
  out << "buckets " << buckets_to_string(ckpt.buckets) << '\n';

  const TrainState& s = ckpt.state;
  const bool moments = !s.adam_m.embedding.empty();
  out << "[state]\n";
  out << "step " << s.step << '\n';
  out << "train_loss_ema " << format_double(s.train_loss_ema) << '\n';
  out << "rng_state " << s.rng.state() << '\n';
  out << "dev_perplexity " << s.dev_perplexity.size();
  for (double v : s.dev_perplexity) out << ' ' << format_double(v);
  out << '\n';
  out << "adam_moments " << (moments ? 1 : 0) << '\n';

  out << "[vocab " << ckpt.vocab.size() << "]\n";
  for (const std::string& t : ckpt.vocab) out << t << '\n';

  for (const auto& p : m.params.named()) {
    out << "[param " << p.name << "]\n";
    write_matrix(out, *p.matrix);
  }
  if (moments) {
    for (const auto& p : s.adam_m.named()) {
      out << "[adam_m " << p.name << "]\n";
      write_matrix(out, *p.matrix);
    }
    for (const auto& p : s.adam_v.named()) {
      out << "[adam_v " << p.name << "]\n";
      write_matrix(out, *p.matrix);
    }
  }
  out << "[end]\n";
}

Checkpoint read_checkpoint(std::istream& in) {
  SectionReader r(in);
  std::string magic;
  if (!std::getline(in, magic)) throw CheckpointError("empty checkpoint");
  if (magic != kCheckpointMagic) {
    throw CheckpointError("unsupported checkpoint header '" + magic + "' (expected '" +
                          kCheckpointMagic + "')");
  }

  Checkpoint ckpt;
  r.expect_header("[config]");
  try {
    const auto cfg = r.key_values("[config]", 7);
    ModelDims dims;
    dims.vocab = std::stoul(require(cfg, "vocab_size", "[config]"));
    dims.embed = std::stoul(require(cfg, "embed_dim", "[config]"));
    dims.hidden = std::stoul(require(cfg, "hidden_dim", "[config]"));
    dims.layers = std::stoul(require(cfg, "layers", "[config]"));
    const TimescaleSchedule schedule =
        TimescaleSchedule::parse(require(cfg, "schedule", "[config]"), dims.layers);
    ckpt.reverse_source = require(cfg, "reverse_source", "[config]") == "1";
    ckpt.buckets = parse_bucket_list(require(cfg, "buckets", "[config]"));
    validate_buckets(ckpt.buckets);
    // Shapes only; every value is overwritten below.
    Rng unused(0);
    ckpt.model = Seq2SeqModel::create(dims, schedule, unused);
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("section [config]: ") + e.what());
  }

  r.expect_header("[state]");
  bool moments = false;
  try {
    const auto st = r.key_values("[state]", 5);
    ckpt.state.step = std::stoull(require(st, "step", "[state]"));
    ckpt.state.train_loss_ema = parse_double(require(st, "train_loss_ema", "[state]"));
    ckpt.state.rng.set_state(std::stoull(require(st, "rng_state", "[state]")));
    std::istringstream dev(require(st, "dev_perplexity", "[state]"));
    std::size_t n = 0;
    dev >> n;
    for (std::size_t i = 0; i < n; ++i) {
      std::string v;
      if (!(dev >> v)) throw CheckpointError("section [state]: short dev_perplexity list");
      ckpt.state.dev_perplexity.push_back(parse_double(v));
    }
    moments = require(st, "adam_moments", "[state]") == "1";
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("section [state]: ") + e.what());
  }

  const std::string vocab_header = r.next_line("[vocab]");
  std::size_t vocab_count = 0;
  if (vocab_header.rfind("[vocab ", 0) != 0 || vocab_header.back() != ']') {
    throw CheckpointError("expected section [vocab N], found '" + vocab_header + "'");
  }
  try {
    vocab_count = std::stoul(vocab_header.substr(7, vocab_header.size() - 8));
  } catch (const std::exception&) {
    throw CheckpointError("section [vocab]: bad count in '" + vocab_header + "'");
  }
  for (std::size_t i = 0; i < vocab_count; ++i) ckpt.vocab.push_back(r.next_line("[vocab]"));
  if (!ckpt.vocab.empty() && ckpt.vocab.size() != ckpt.model.dims.vocab) {
    throw CheckpointError("section [vocab]: " + std::to_string(ckpt.vocab.size()) +
                          " tokens for a model vocabulary of " +
                          std::to_string(ckpt.model.dims.vocab));
  }

  for (auto& p : ckpt.model.params.named())
    *p.matrix = r.matrix("[param " + p.name + "]", *p.matrix);
  if (moments) {
    ckpt.state.adam_m = ckpt.model.params.zeros_like();
    ckpt.state.adam_v = ckpt.model.params.zeros_like();
    for (auto& p : ckpt.state.adam_m.named())
      *p.matrix = r.matrix("[adam_m " + p.name + "]", *p.matrix);
    for (auto& p : ckpt.state.adam_v.named())
      *p.matrix = r.matrix("[adam_v " + p.name + "]", *p.matrix);
  }
  r.expect_header("[end]");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write checkpoint " + tmp.string());
    write_checkpoint(out, ckpt);
    if (!out.flush()) throw CheckpointError("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot read checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace mtgru
