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

// ROUGE-N and ROUGE-L against a single reference.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mtgru {

struct RougeScore {
  double recall = 0.0;
  double precision = 0.0;
  double f_score = 0.0;

  bool operator==(const RougeScore&) const = default;
};

struct RougeReport {
  RougeScore rouge1;
  RougeScore rouge2;
  RougeScore rougeL;
};

/// F_beta of recall and precision; 0 when both are 0. beta = 1 is the harmonic mean.
double f_measure(double recall, double precision, double beta = 1.0);

/// Clipped n-gram overlap. A zero denominator yields 0 for that component.
RougeScore rouge_n(std::span<const std::string> candidate, std::span<const std::string> reference,
                   std::size_t n, double beta = 1.0);

/// Longest common subsequence of the two token lists.
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);
RougeScore rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference,
                   double beta = 1.0);

/// Joins the summaries in order, tokenizes both sides and scores against the abstract.
/// Throws std::invalid_argument on an empty abstract or an empty summary list.
RougeReport evaluate_article(std::span<const std::string> paragraph_summaries,
                             const std::string& abstract_text, double beta = 1.0);

/// Component-wise arithmetic mean; all zeros for an empty list.
RougeReport mean_report(std::span<const RougeReport> reports);

}  // namespace mtgru
