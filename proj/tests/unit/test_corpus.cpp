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

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>

#include "doctest.h"
#include "mtgru/corpus.hpp"
#include "oracles/tfidf_oracle.hpp"

using namespace mtgru;

namespace {

const std::filesystem::path kArticles = std::filesystem::path(MTGRU_FIXTURE_DIR) / "articles";

DocumentRecord load(const std::string& name) {
  return extract_sections(read_text_file(kArticles / name), name);
}

bool contains_subsequence(const Tokens& haystack, const Tokens& needle) {
  if (needle.size() > haystack.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i)
    if (std::equal(needle.begin(), needle.end(), haystack.begin() + i)) return true;
  return false;
}

// Random paragraph built from a small pool so repeats and ties are common.
std::vector<std::string> random_sentences(Rng& rng, std::size_t count) {
  static const std::vector<std::string> pool{"the", "model", "of", "river", "sensor", "and", "graph",
                                             "bread", "we", "a", "tidal", "yeast", "loan", "cloud"};
  std::vector<std::string> out;
  for (std::size_t s = 0; s < count; ++s) {
    std::string text = "Alpha";
    const std::size_t words = rng.uniform_index(6);
    for (std::size_t w = 0; w < words; ++w) text += " " + pool[rng.uniform_index(pool.size())];
    text += ".";
    out.push_back(text);
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

}  // namespace

TEST_CASE("fixture articles yield their hand-counted paragraphs") {
  const DocumentRecord tidal = load("tidal_sensors.tex");
  REQUIRE(tidal.intro_paragraphs.size() == 3);
  CHECK(tidal.intro_paragraphs[0].rfind("Estuaries are sensitive", 0) == 0);
  CHECK(tidal.intro_paragraphs[0].find("CITE") != std::string::npos);
  CHECK(tidal.intro_paragraphs[1].find("MATH") != std::string::npos);
  CHECK(tidal.intro_paragraphs[2].find("REF") != std::string::npos);
  CHECK(tidal.abstract_text.rfind("We describe a low-power", 0) == 0);
  for (const char* name : {"graph_coloring.tex", "bread_fermentation.tex", "solar_forecast.tex", "library_loans.tex"})
    CHECK(load(name).intro_paragraphs.size() == 3);
}

TEST_CASE("comments, floats and footnotes never reach the output") {
  for (const char* name : {"tidal_sensors.tex", "bread_fermentation.tex", "library_loans.tex"}) {
    const DocumentRecord d = load(name);
    for (const std::string& p : d.intro_paragraphs) {
      CHECK(p.find('%') == std::string::npos);
      CHECK(p.find("TODO") == std::string::npos);
      CHECK(p.find("commented") == std::string::npos);
      CHECK(p.find("housing") == std::string::npos);
      CHECK(p.find("Final pH") == std::string::npos);
      CHECK(p.find('\\') == std::string::npos);
    }
  }
}

TEST_CASE("subsections stay inside the introduction") {
  const DocumentRecord g = load("graph_coloring.tex");
  CHECK(g.intro_paragraphs.back().find("randomized tie breaking") != std::string::npos);
  for (const std::string& p : g.intro_paragraphs) CHECK(p.find("Contributions") == std::string::npos);
}

TEST_CASE("missing sections raise an extraction error naming them") {
  const std::string no_intro = "\\begin{abstract}x\\end{abstract}\\section{Method}y";
  const std::string no_abstract = "\\section{Introduction}y";
  try {
    extract_sections(no_intro);
    FAIL("expected ExtractionError");
  } catch (const ExtractionError& e) {
    CHECK(std::string(e.what()).find("introduction") != std::string::npos);
  }
  try {
    extract_sections(no_abstract);
    FAIL("expected ExtractionError");
  } catch (const ExtractionError& e) {
    CHECK(std::string(e.what()).find("abstract") != std::string::npos);
  }
}

TEST_CASE("paragraph splitting") {
  CHECK(split_paragraphs("A.\n\nB.") == std::vector<std::string>{"A.", "B."});
  CHECK(split_paragraphs("A.\nB.").size() == 1);
  CHECK(split_paragraphs("A.\n\n\n\nB.").size() == 2);
  CHECK(split_paragraphs("  \n\n ").empty());
  Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> paras;
    const std::size_t n = 1 + rng.uniform_index(6);
    for (std::size_t i = 0; i < n; ++i) paras.push_back(join(random_sentences(rng, 1 + rng.uniform_index(3)), "\n"));
    CHECK(split_paragraphs(join(paras, "\n\n")) == paras);
  }
}

TEST_CASE("sentence splitting") {
  CHECK(split_sentences("We do X. We do Y.").size() == 2);
  CHECK(split_sentences("See Fig. 3 for details.").size() == 1);
  CHECK(split_sentences("Is it? Yes!").size() == 2);
  CHECK(split_sentences("Smith et al. Showed it. Then e.g. Things.").size() == 2);
}

TEST_CASE("tokenizer rules and idempotence") {
  CHECK(tokenize("The cat sat.") == Tokens{"the", "cat", "sat", "."});
  CHECK(tokenize("in 2016.") == Tokens{"in", "NUM", "."});
  CHECK(tokenize("see CITE and (MATH)") == Tokens{"see", "CITE", "and", "(", "MATH", ")"});
  CHECK(tokenize("word") == tokenize("word"));
  for (const char* name : {"tidal_sensors.tex", "graph_coloring.tex", "solar_forecast.tex"}) {
    const DocumentRecord d = load(name);
    for (const std::string& p : d.intro_paragraphs) {
      const Tokens once = tokenize(p);
      CHECK(tokenize(join_tokens(once)) == once);
    }
  }
}

TEST_CASE("vocabulary keeps the most frequent tokens with lexicographic ties") {
  const std::vector<Tokens> streams{{"a", "b", "c", "a"}, {"b", "a"}};
  const Vocabulary v = build_vocab(streams, 6);
  CHECK(v.tokens() == std::vector<std::string>{"_PAD", "_GO", "_EOS", "_UNK", "a", "b"});
  CHECK(v.id("c") == kUnk);
  const Vocabulary tie = build_vocab(std::vector<Tokens>{{"z", "y", "x"}}, 6);
  CHECK(tie.tokens()[4] == "x");
  CHECK(tie.tokens()[5] == "y");
  const Tokens text{"b", "a", "a"};
  CHECK(v.decode(v.encode(text)) == text);
  std::stringstream ss;
  write_vocab(ss, v);
  CHECK(read_vocab(ss).tokens() == v.tokens());
}

TEST_CASE("idf of a token present everywhere is zero") {
  std::vector<DocumentRecord> docs{{"a", "x", {"river flows", "river bends"}}, {"b", "y", {"river dries"}}};
  const CorpusStats stats = build_stats(docs);
  CHECK(stats.document_count == 3);
  CHECK(stats.idf("river") == 0.0);
  CHECK(stats.idf("flows") == doctest::Approx(std::log(3.0)));
  CHECK(stats.idf("unseen") == doctest::Approx(std::log(3.0)));
  const CorpusStats by_article = build_stats(docs, IdfUnit::Article);
  CHECK(by_article.document_count == 2);
  CHECK(by_article.idf("flows") == doctest::Approx(std::log(2.0)));
}

TEST_CASE("salience: single sentence, empty input and the rare-term sentence") {
  const CorpusStats empty;
  CHECK(tfidf_salient(std::vector<std::string>{"Only one."}, empty).index == 0);
  CHECK_THROWS_AS(tfidf_salient(std::vector<std::string>{}, empty), std::invalid_argument);

  std::vector<DocumentRecord> docs(1);
  docs[0].intro_paragraphs = {"The model is good. Quasar nebula pulsar.", "The model is fine."};
  const CorpusStats stats = build_stats(docs);
  CHECK(tfidf_salient(split_sentences(docs[0].intro_paragraphs[0]), stats).index == 1);
}

TEST_CASE("salience matches the brute-force scorer on random corpora") {
  Rng rng(42);
  for (int corpus = 0; corpus < 30; ++corpus) {
    std::vector<DocumentRecord> docs(1 + rng.uniform_index(5));
    std::vector<std::vector<std::string>> sentences;
    std::vector<std::string> all_paragraphs;
    for (DocumentRecord& d : docs) {
      const std::size_t n = 1 + rng.uniform_index(8);
      for (std::size_t p = 0; p < n; ++p) {
        sentences.push_back(random_sentences(rng, 1 + rng.uniform_index(5)));
        d.intro_paragraphs.push_back(join(sentences.back(), " "));
        all_paragraphs.push_back(d.intro_paragraphs.back());
      }
    }
    const CorpusStats stats = build_stats(docs);
    for (const auto& s : sentences) {
      CHECK(tfidf_sentence_scores(s, stats) == oracle::tfidf_scores(s, all_paragraphs));
      CHECK(tfidf_salient(s, stats).index == oracle::salient(s, all_paragraphs));
    }
  }
}

TEST_CASE("pairs conserve paragraphs and targets come from their sources") {
  std::vector<DocumentRecord> docs;
  for (const char* name : {"tidal_sensors.tex", "graph_coloring.tex", "bread_fermentation.tex",
                           "solar_forecast.tex", "library_loans.tex"})
    docs.push_back(load(name));
  const CorpusStats stats = build_stats(docs);
  const PairSet set = make_pairs(docs, stats);
  CHECK(set.paragraphs == 15);
  CHECK(set.pairs.size() + set.overflow == set.paragraphs);
  for (const TrainingPair& p : set.pairs) CHECK(contains_subsequence(p.source, p.target));

  std::vector<Tokens> streams;
  for (const TrainingPair& p : set.pairs) streams.push_back(p.source);
  const Vocabulary v = build_vocab(streams, 60);
  for (const TrainingPair& p : set.pairs)
    for (TokenId id : v.encode(p.target)) CHECK(id < v.size());

  std::stringstream ss;
  write_pairs(ss, set.pairs);
  const std::vector<TrainingPair> back = read_pairs(ss);
  REQUIRE(back.size() == set.pairs.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].doc_id == set.pairs[i].doc_id);
    CHECK(back[i].paragraph_index == set.pairs[i].paragraph_index);
    CHECK(back[i].source == set.pairs[i].source);
    CHECK(back[i].target == set.pairs[i].target);
  }
}

TEST_CASE("manifest reader skips blanks and comments") {
  std::istringstream in("# ids\na.tex\n\n  b.tex  \n# end\n");
  CHECK(read_manifest(in) == std::vector<std::string>{"a.tex", "b.tex"});
}
