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

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "mtgru/corpus.hpp"
#include "mtgru/rouge.hpp"
#include "oracles/rouge_oracle.hpp"

using namespace mtgru;

namespace {

using Toks = std::vector<std::string>;

Toks random_tokens(Rng& rng, std::size_t max_len, std::size_t alphabet) {
  Toks out(rng.uniform_index(max_len + 1));
  for (std::string& t : out) t = std::string(1, static_cast<char>('a' + rng.uniform_index(alphabet)));
  return out;
}

void check_same(const RougeScore& s, const oracle::Prf& o) {
  CHECK(std::abs(s.recall - o.recall) <= 1e-9);
  CHECK(std::abs(s.precision - o.precision) <= 1e-9);
  CHECK(std::abs(s.f_score - o.f) <= 1e-9);
}

bool in_unit_interval(const RougeScore& s) {
  for (double v : {s.recall, s.precision, s.f_score})
    if (!(v >= 0.0 && v <= 1.0)) return false;
  return true;
}

}  // namespace

TEST_CASE("hand-counted fixtures") {
  const Toks abc{"a", "b", "c"}, abd{"a", "b", "d"};
  CHECK(rouge_n(abc, abc, 1) == RougeScore{1, 1, 1});
  CHECK(rouge_l(abc, abc) == RougeScore{1, 1, 1});
  const RougeScore uni = rouge_n(abc, abd, 1);
  CHECK(uni.recall == doctest::Approx(2.0 / 3.0));
  CHECK(uni.precision == doctest::Approx(2.0 / 3.0));
  CHECK(uni.f_score == doctest::Approx(2.0 / 3.0));
  const RougeScore bi = rouge_n(abc, abd, 2);
  CHECK(bi.recall == 0.5);
  CHECK(bi.precision == 0.5);
  const RougeScore l = rouge_l(Toks{"a", "x", "b", "y", "c"}, abc);
  CHECK(l.recall == 1.0);
  CHECK(l.precision == doctest::Approx(0.6));
  CHECK(rouge_l(abc, Toks{"x", "y"}) == RougeScore{0, 0, 0});
}

TEST_CASE("degenerate inputs score zero and n = 0 is rejected") {
  CHECK(rouge_n(Toks{}, Toks{"a"}, 1) == RougeScore{0, 0, 0});
  CHECK(rouge_n(Toks{"a"}, Toks{"a"}, 2) == RougeScore{0, 0, 0});
  CHECK(rouge_l(Toks{}, Toks{}) == RougeScore{0, 0, 0});
  CHECK_THROWS_AS(rouge_n(Toks{"a"}, Toks{"a"}, 0), std::invalid_argument);
  CHECK(f_measure(0.0, 0.0) == 0.0);
  CHECK(f_measure(1.0, 0.5, 2.0) == doctest::Approx(5.0 * 0.5 / (4.0 * 0.5 + 1.0)));
  CHECK_THROWS(f_measure(0.5, 0.5, 0.0));
}

TEST_CASE("clipping limits repeated candidate tokens") {
  const RougeScore s = rouge_n(Toks{"a", "a", "a"}, Toks{"a"}, 1);
  CHECK(s.recall == 1.0);
  CHECK(s.precision == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("self-overlap recall is one") {
  Rng rng(51);
  for (int trial = 0; trial < 200; ++trial) {
    const Toks x = random_tokens(rng, 20, 5);
    for (std::size_t n = 1; n <= 3; ++n)
      if (x.size() >= n) CHECK(rouge_n(x, x, n).recall == 1.0);
    if (!x.empty()) CHECK(rouge_l(x, x).recall == 1.0);
  }
}

TEST_CASE("extending a candidate never lowers LCS recall") {
  Rng rng(52);
  for (int trial = 0; trial < 300; ++trial) {
    const Toks ref = random_tokens(rng, 15, 4);
    Toks cand = random_tokens(rng, 10, 4);
    Toks longer = cand;
    const std::size_t extra = 1 + rng.uniform_index(4);
    for (std::size_t k = 0; k < extra; ++k)
      longer.insert(longer.begin() + static_cast<std::ptrdiff_t>(rng.uniform_index(longer.size() + 1)),
                    std::string(1, static_cast<char>('a' + rng.uniform_index(4))));
    CHECK(rouge_l(longer, ref).recall >= rouge_l(cand, ref).recall);
  }
}

TEST_CASE("scores agree with the brute-force oracle and stay in [0, 1]") {
  Rng rng(53);
  for (int trial = 0; trial < 500; ++trial) {
    const Toks cand = random_tokens(rng, 20, 1 + rng.uniform_index(6));
    const Toks ref = random_tokens(rng, 20, 1 + rng.uniform_index(6));
    for (std::size_t n = 1; n <= 2; ++n) {
      const RougeScore s = rouge_n(cand, ref, n);
      check_same(s, oracle::rouge_n(cand, ref, n));
      CHECK(in_unit_interval(s));
    }
    const RougeScore l = rouge_l(cand, ref);
    check_same(l, oracle::rouge_l(cand, ref));
    CHECK(in_unit_interval(l));
    CHECK(lcs_length(cand, ref) == oracle::lcs(cand, ref));
  }
}

TEST_CASE("article scoring concatenates in order") {
  const std::vector<std::string> summaries{"the cat sat .", "on the mat ."};
  const RougeReport same = evaluate_article(summaries, "The cat sat. On the mat.");
  CHECK(same.rouge1.f_score == 1.0);
  CHECK(same.rouge2.f_score == 1.0);
  CHECK(same.rougeL.f_score == 1.0);
  const std::vector<std::string> swapped{"on the mat .", "the cat sat ."};
  const RougeReport perm = evaluate_article(swapped, "The cat sat. On the mat.");
  CHECK(perm.rouge1 == same.rouge1);
  CHECK(perm.rougeL.f_score < 1.0);
  CHECK_THROWS_AS(evaluate_article(std::vector<std::string>{}, "x"), std::invalid_argument);
  CHECK_THROWS_AS(evaluate_article(summaries, "   "), std::invalid_argument);
}

TEST_CASE("fixture-set means match the offline reference") {
  const std::filesystem::path root = std::filesystem::path(MTGRU_FIXTURE_DIR) / "rouge";
  std::vector<RougeReport> reports;
  for (const char* id : {"alpha", "beta", "gamma"}) {
    std::ifstream gen(root / "generated" / (std::string(id) + ".txt"));
    std::vector<std::string> lines;
    for (std::string line; std::getline(gen, line);)
      if (line.find_first_not_of(" \t") != std::string::npos) lines.push_back(line);
    reports.push_back(evaluate_article(lines, read_text_file(root / "gold" / (std::string(id) + ".txt"))));
  }
  const RougeReport mean = mean_report(reports);
  // Produced by tests/oracles/rouge_reference.py on the same files.
  auto expect = [](const RougeScore& s, double r, double p, double f) {
    CHECK(std::abs(s.recall - r) <= 1e-9);
    CHECK(std::abs(s.precision - p) <= 1e-9);
    CHECK(std::abs(s.f_score - f) <= 1e-9);
  };
  expect(mean.rouge1, 0.53670634920634919, 0.47466955671724254, 0.49470085470085473);
  expect(mean.rouge2, 0.28201825013419218, 0.23694083694083692, 0.25302425066576006);
  expect(mean.rougeL, 0.47718253968253971, 0.39891198095966685, 0.42803418803418802);
  CHECK(mean_report(std::vector<RougeReport>{}).rouge1 == RougeScore{});
}
