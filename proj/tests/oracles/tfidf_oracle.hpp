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

// Brute-force salience: document frequency by rescanning every paragraph,
// term frequency by rescanning the target paragraph, stopwords by linear
// search. Arithmetic order matches the scorer so results compare exactly.

#include <cctype>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mtgru/corpus.hpp"

namespace oracle {

inline bool contains(const std::vector<std::string>& v, const std::string& s) {
  for (const std::string& x : v)
    if (x == s) return true;
  return false;
}

inline bool content(const std::string& t) {
  if (mtgru::is_placeholder(t) || contains(mtgru::stopwords(), t)) return false;
  for (unsigned char c : t)
    if (std::isalnum(c) || c >= 0x80) return true;
  return false;
}

/// `corpus` holds every paragraph of the collection, each one a document.
inline std::vector<double> tfidf_scores(const std::vector<std::string>& sentences,
                                        const std::vector<std::string>& corpus) {
  std::vector<std::vector<std::string>> docs;
  for (const std::string& p : corpus) docs.push_back(mtgru::tokenize(p));
  std::vector<std::vector<std::string>> sent;
  std::vector<std::string> para;
  for (const std::string& s : sentences) {
    sent.push_back(mtgru::tokenize(s));
    para.insert(para.end(), sent.back().begin(), sent.back().end());
  }
  std::vector<double> scores;
  for (const auto& tokens : sent) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const std::string& t : tokens) {
      if (!content(t)) continue;
      std::size_t count = 0;
      for (const std::string& u : para) count += (u == t);
      std::size_t df = 0;
      for (const auto& d : docs) df += contains(d, t) ? 1 : 0;
      const double idf = docs.empty() ? 0.0
                                      : std::log(static_cast<double>(docs.size()) /
                                                 static_cast<double>(df == 0 ? 1 : df));
      sum += static_cast<double>(count) / static_cast<double>(para.size()) * idf;
      ++n;
    }
    scores.push_back(n ? sum / static_cast<double>(n) : 0.0);
  }
  return scores;
}

/// Index of the first sentence holding the maximum score.
inline std::size_t salient(const std::vector<std::string>& sentences, const std::vector<std::string>& corpus) {
  const std::vector<double> s = tfidf_scores(sentences, corpus);
  std::size_t best = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    bool first_max = true;
    for (std::size_t j = 0; j < s.size(); ++j)
      if (s[j] > s[i] || (s[j] == s[i] && j < i)) first_max = false;
    if (first_max) best = i;
  }
  return best;
}

}  // namespace oracle
