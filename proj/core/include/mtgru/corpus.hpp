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

// Dataset construction from LaTeX articles: Abstract and Introduction
// extraction, paragraph and sentence segmentation, tokenization, vocabulary,
// and TF-IDF salient-sentence targets.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mtgru/seq2seq.hpp"

namespace mtgru {

using Tokens = std::vector<std::string>;

class ExtractionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DocumentRecord {
  std::string doc_id;
  std::string abstract_text;
  std::vector<std::string> intro_paragraphs;
};

// Placeholder tokens. They survive tokenization unchanged.
inline constexpr std::string_view kMathToken = "MATH";
inline constexpr std::string_view kCiteToken = "CITE";
inline constexpr std::string_view kRefToken = "REF";
inline constexpr std::string_view kNumToken = "NUM";
bool is_placeholder(std::string_view token);

/// Throws ExtractionError naming the missing section.
DocumentRecord extract_sections(std::string_view latex_source, std::string doc_id = {});

/// Removes comments, math, citations, floats and commands from a LaTeX
/// fragment, keeping visible text. Paragraph breaks are preserved.
std::string clean_latex(std::string_view fragment);

std::vector<std::string> split_paragraphs(std::string_view text);
std::vector<std::string> split_sentences(std::string_view paragraph);
Tokens tokenize(std::string_view text);
std::string join_tokens(std::span<const std::string> tokens);

class Vocabulary {
 public:
  static constexpr std::string_view kPadToken = "_PAD";
  static constexpr std::string_view kGoToken = "_GO";
  static constexpr std::string_view kEosToken = "_EOS";
  static constexpr std::string_view kUnkToken = "_UNK";

  Vocabulary();
  /// Builds from an id-ordered token list whose first four entries are the specials.
  explicit Vocabulary(std::vector<std::string> id_to_token);

  std::size_t size() const { return id_to_token_.size(); }
  TokenId id(std::string_view token) const;  // UNK for unknown tokens
  const std::string& token(TokenId id) const;
  bool contains(std::string_view token) const;
  const std::vector<std::string>& tokens() const { return id_to_token_; }

  TokenSeq encode(std::span<const std::string> tokens) const;
  /// Drops special tokens.
  Tokens decode(std::span<const TokenId> ids) const;

 private:
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, TokenId> token_to_id_;
};

/// Keeps the max_size − 4 most frequent tokens (ties lexicographic) after the specials.
Vocabulary build_vocab(std::span<const Tokens> streams, std::size_t max_size);
void write_vocab(std::ostream& out, const Vocabulary& vocab);
Vocabulary read_vocab(std::istream& in);

/// Which text unit counts as a "document" for document frequency.
enum class IdfUnit { Paragraph, Article };

struct CorpusStats {
  std::map<std::string, std::size_t> document_frequency;
  std::size_t document_count = 0;

  double idf(const std::string& token) const;
};

CorpusStats build_stats(std::span<const DocumentRecord> documents, IdfUnit unit = IdfUnit::Paragraph);
void write_stats(std::ostream& out, const CorpusStats& stats);

/// The bundled English stopword list.
const std::vector<std::string>& stopwords();
bool is_stopword(std::string_view token);
/// Not a stopword, not a placeholder, and contains a letter or digit.
bool is_content_token(std::string_view token);

struct SalientSentence {
  std::size_t index = 0;
  std::string sentence;
  double score = 0.0;
};

/// Score of each sentence: mean over its content tokens of
/// tf(token, paragraph) · idf(token), with tf normalized by paragraph token
/// count. Sentences without content tokens score 0.
std::vector<double> tfidf_sentence_scores(std::span<const std::string> sentences,
                                          const CorpusStats& stats);
/// Highest-scoring sentence; the earliest wins ties.
SalientSentence tfidf_salient(std::span<const std::string> sentences, const CorpusStats& stats);

struct TrainingPair {
  std::string doc_id;
  std::size_t paragraph_index = 0;
  Tokens source;
  Tokens target;
};

struct PairSet {
  std::vector<TrainingPair> pairs;
  std::size_t overflow = 0;    // paragraphs longer than the largest bucket
  std::size_t paragraphs = 0;
};

PairSet make_pairs(std::span<const DocumentRecord> documents, const CorpusStats& stats,
                   std::span<const Bucket> buckets = default_buckets());

/// doc_id, paragraph_index, source tokens, target tokens; tab separated.
void write_pairs(std::ostream& out, std::span<const TrainingPair> pairs);
std::vector<TrainingPair> read_pairs(std::istream& in);

/// Reads doc ids, one per line; blank lines and '#' comments are skipped.
std::vector<std::string> read_manifest(std::istream& in);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace mtgru
