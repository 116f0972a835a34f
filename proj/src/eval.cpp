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

#include "semsteer/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

#include "semsteer/error.hpp"

namespace semsteer {

std::vector<std::string> rouge_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) {
    for (char& ch : tok) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    while (!tok.empty() && std::ispunct(static_cast<unsigned char>(tok.back()))) tok.pop_back();
    if (!tok.empty()) out.push_back(std::move(tok));
  }
  return out;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l_f1(std::string_view candidate, std::span<const std::string> references) {
  if (references.empty()) throw InvalidArgument("empty reference list");
  const auto cand = rouge_tokens(candidate);
  if (cand.empty()) throw InvalidArgument("empty candidate");
  double best = 0.0;
  for (const auto& ref : references) {
    const auto r = rouge_tokens(ref);
    if (r.empty()) continue;
    const auto lcs = static_cast<double>(lcs_length(cand, r));
    if (lcs == 0.0) continue;
    const double p = lcs / static_cast<double>(cand.size());
    const double rec = lcs / static_cast<double>(r.size());
    best = std::max(best, 2.0 * p * rec / (p + rec));
  }
  return best;
}

CorrectnessLabel label_correctness(std::string_view candidate, std::span<const std::string> references,
                                   double threshold) {
  CorrectnessLabel out;
  out.score = rouge_l_f1(candidate, references);
  out.threshold = threshold;
  out.correct = out.score >= threshold;
  return out;
}

std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double auroc(std::span<const double> scores, std::span<const bool> labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("scores and labels differ in length");
  const auto ranks = midranks(scores);
  double pos = 0.0;
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) {
      pos += 1.0;
      rank_sum += ranks[i];
    }
  }
  const double neg = static_cast<double>(labels.size()) - pos;
  if (pos == 0.0 || neg == 0.0) throw InvalidArgument("degenerate labels");
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

double spearman_rho(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("inputs differ in length");
  if (a.size() < 3) throw InvalidArgument("spearman_rho needs at least 3 values");
  const auto ra = midranks(a);
  const auto rb = midranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw InvalidArgument("zero rank variance");
  return sab / std::sqrt(saa * sbb);
}

}  // namespace semsteer
