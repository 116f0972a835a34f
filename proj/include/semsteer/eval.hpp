// Copyright 2026 The semsteer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SEMSTEER_EVAL_HPP
#define SEMSTEER_EVAL_HPP

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace semsteer {

inline constexpr double kCorrectnessThreshold = 0.3;
inline constexpr double kCorrectnessThresholdMi = 0.2;

/// Lowercased whitespace tokens with trailing punctuation stripped; tokens
/// that become empty are dropped.
std::vector<std::string> rouge_tokens(std::string_view text);

/// Length of the longest common subsequence.
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

/// ROUGE-L F1 of `candidate`, maximized over `references`.
double rouge_l_f1(std::string_view candidate, std::span<const std::string> references);

struct CorrectnessLabel {
  double score = 0.0;
  bool correct = false;
  double threshold = kCorrectnessThreshold;
};

CorrectnessLabel label_correctness(std::string_view candidate, std::span<const std::string> references,
                                   double threshold = kCorrectnessThreshold);

/// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> midranks(std::span<const double> values);

/// Mann-Whitney AUROC; positives are expected to score higher, ties count ½.
double auroc(std::span<const double> scores, std::span<const bool> labels);

/// Pearson correlation of the midranks.
double spearman_rho(std::span<const double> a, std::span<const double> b);

}  // namespace semsteer

#endif  // SEMSTEER_EVAL_HPP
