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

#include "semsteer/augment.hpp"

#include <random>
#include <sstream>

#include "semsteer/error.hpp"

namespace semsteer {

namespace {

std::string join(const std::vector<std::string>& tokens, std::size_t count) {
  std::string out;
  for (std::size_t i = 0; i < count; ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::string prefix_with_marker(const std::vector<std::string>& tokens, std::size_t keep, std::string_view marker) {
  std::string out = join(tokens, keep);
  out += ' ';
  out += marker;
  return out;
}

Rng stream(std::uint64_t seed, std::size_t record, std::size_t variant) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(record), static_cast<std::uint32_t>(variant)};
  return Rng(seq);
}

void check(const std::vector<std::string>& p, const std::vector<std::string>& h) {
  if (p.empty() || h.empty()) throw InvalidArgument("premise and hypothesis must be non-empty");
}

}  // namespace

std::string_view to_string(NliLabel l) {
  switch (l) {
    case NliLabel::kEntail: return "entail";
    case NliLabel::kNeutral: return "neutral";
    case NliLabel::kContradict: return "contradict";
  }
  return "unknown";
}

NliLabel parse_nli_label(std::string_view s) {
  if (s == "entail" || s == "entailment") return NliLabel::kEntail;
  if (s == "neutral") return NliLabel::kNeutral;
  if (s == "contradict" || s == "contradiction") return NliLabel::kContradict;
  throw InvalidArgument("unknown NLI label '" + std::string(s) + "'");
}

std::string_view to_string(CorruptedSide s) {
  switch (s) {
    case CorruptedSide::kNone: return "none";
    case CorruptedSide::kPremise: return "premise";
    case CorruptedSide::kHypothesis: return "hypothesis";
  }
  return "unknown";
}

std::string_view to_string(CorruptionMode m) {
  switch (m) {
    case CorruptionMode::kIntact: return "intact";
    case CorruptionMode::kTruncate: return "truncate";
    case CorruptionMode::kMask: return "mask";
  }
  return "unknown";
}

std::vector<std::string> whitespace_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) out.push_back(std::move(tok));
  return out;
}

std::vector<LabeledPair> unroll_truncations(const LabeledPair& pair, std::string_view marker) {
  const auto p = whitespace_tokens(pair.premise);
  const auto h = whitespace_tokens(pair.hypothesis);
  check(p, h);
  std::vector<LabeledPair> out;
  out.reserve(h.size() + p.size() - 1);
  LabeledPair intact = pair;
  intact.corruption = {};
  out.push_back(intact);
  for (std::size_t keep = 1; keep < h.size(); ++keep) {
    LabeledPair r = intact;
    r.hypothesis = prefix_with_marker(h, keep, marker);
    r.corruption = {CorruptedSide::kHypothesis, CorruptionMode::kTruncate, static_cast<double>(keep)};
    out.push_back(std::move(r));
  }
  for (std::size_t keep = 1; keep < p.size(); ++keep) {
    LabeledPair r = intact;
    r.premise = prefix_with_marker(p, keep, marker);
    r.corruption = {CorruptedSide::kPremise, CorruptionMode::kTruncate, static_cast<double>(keep)};
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<LabeledPair> sample_truncation(const LabeledPair& pair, std::string_view marker, std::uint64_t seed,
                                           std::size_t record) {
  const auto p = whitespace_tokens(pair.premise);
  const auto h = whitespace_tokens(pair.hypothesis);
  check(p, h);
  LabeledPair intact = pair;
  intact.corruption = {};
  std::vector<LabeledPair> out{intact};
  std::vector<CorruptedSide> sides;
  if (p.size() > 1) sides.push_back(CorruptedSide::kPremise);
  if (h.size() > 1) sides.push_back(CorruptedSide::kHypothesis);
  if (sides.empty()) return out;
  Rng rng = stream(seed, record, 0);
  const CorruptedSide side = sides[std::uniform_int_distribution<std::size_t>(0, sides.size() - 1)(rng)];
  const auto& tokens = side == CorruptedSide::kPremise ? p : h;
  const std::size_t keep = std::uniform_int_distribution<std::size_t>(1, tokens.size() - 1)(rng);
  LabeledPair r = intact;
  (side == CorruptedSide::kPremise ? r.premise : r.hypothesis) = prefix_with_marker(tokens, keep, marker);
  r.corruption = {side, CorruptionMode::kTruncate, static_cast<double>(keep)};
  out.push_back(std::move(r));
  return out;
}

std::vector<LabeledPair> mask_variants(const LabeledPair& pair, std::size_t k, std::string_view marker,
                                       std::uint64_t seed, std::size_t record) {
  const auto p = whitespace_tokens(pair.premise);
  const auto h = whitespace_tokens(pair.hypothesis);
  check(p, h);
  LabeledPair intact = pair;
  intact.corruption = {};
  std::vector<LabeledPair> out{intact};
  out.reserve(k + 1);
  for (std::size_t j = 0; j < k; ++j) {
    Rng rng = stream(seed, record, j + 1);
    const bool premise = std::bernoulli_distribution(0.5)(rng);
    const double f = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    std::vector<std::string> tokens = premise ? p : h;
    std::bernoulli_distribution hit(f);
    for (auto& t : tokens) {
      if (hit(rng)) t = std::string(marker);
    }
    LabeledPair r = intact;
    (premise ? r.premise : r.hypothesis) = join(tokens, tokens.size());
    r.corruption = {premise ? CorruptedSide::kPremise : CorruptedSide::kHypothesis, CorruptionMode::kMask, f};
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace semsteer
