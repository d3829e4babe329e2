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

#include "mtgru/rouge.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "mtgru/corpus.hpp"

namespace mtgru {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(std::span<const std::string> tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i)
    ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
  return counts;
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

RougeScore make_score(std::size_t overlap, std::size_t reference_total, std::size_t candidate_total,
                      double beta) {
  RougeScore s;
  s.recall = ratio(overlap, reference_total);
  s.precision = ratio(overlap, candidate_total);
  s.f_score = f_measure(s.recall, s.precision, beta);
  return s;
}

}  // namespace

double f_measure(double recall, double precision, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("f_measure: beta must be positive");
  if (recall + precision == 0.0) return 0.0;
  const double b2 = beta * beta;
  return (1.0 + b2) * recall * precision / (recall + b2 * precision);
}

RougeScore rouge_n(std::span<const std::string> candidate, std::span<const std::string> reference,
                   std::size_t n, double beta) {
  if (n == 0) throw std::invalid_argument("rouge_n: n must be at least 1");
  const NgramCounts cand = count_ngrams(candidate, n);
  const NgramCounts ref = count_ngrams(reference, n);
  std::size_t overlap = 0;
  for (const auto& [gram, count] : cand) {
    auto it = ref.find(gram);
    if (it != ref.end()) overlap += std::min(count, it->second);
  }
  const std::size_t cand_total = candidate.size() >= n ? candidate.size() - n + 1 : 0;
  const std::size_t ref_total = reference.size() >= n ? reference.size() - n + 1 : 0;
  return make_score(overlap, ref_total, cand_total, beta);
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  // Two rolling rows over b.
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeScore rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference,
                   double beta) {
  return make_score(lcs_length(candidate, reference), reference.size(), candidate.size(), beta);
}

RougeReport evaluate_article(std::span<const std::string> paragraph_summaries,
                             const std::string& abstract_text, double beta) {
  if (paragraph_summaries.empty()) {
    throw std::invalid_argument("evaluate_article: no generated summaries");
  }
  const Tokens reference = tokenize(abstract_text);
  if (reference.empty()) throw std::invalid_argument("evaluate_article: empty abstract");
  std::string joined;
  for (std::size_t i = 0; i < paragraph_summaries.size(); ++i) {
    if (i) joined += ' ';
    joined += paragraph_summaries[i];
  }
  const Tokens candidate = tokenize(joined);
  return {rouge_n(candidate, reference, 1, beta), rouge_n(candidate, reference, 2, beta),
          rouge_l(candidate, reference, beta)};
}

RougeReport mean_report(std::span<const RougeReport> reports) {
  RougeReport mean;
  if (reports.empty()) return mean;
  auto add = [](RougeScore& acc, const RougeScore& s) {
    acc.recall += s.recall;
    acc.precision += s.precision;
    acc.f_score += s.f_score;
  };
  for (const RougeReport& r : reports) {
    add(mean.rouge1, r.rouge1);
    add(mean.rouge2, r.rouge2);
    add(mean.rougeL, r.rougeL);
  }
  const double n = static_cast<double>(reports.size());
  for (RougeScore* s : {&mean.rouge1, &mean.rouge2, &mean.rougeL}) {
    s->recall /= n;
    s->precision /= n;
    s->f_score /= n;
  }
  return mean;
}

}  // namespace mtgru
