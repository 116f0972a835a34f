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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "semsteer/augment.hpp"
#include "semsteer/error.hpp"

using namespace semsteer;

namespace {

LabeledPair pair_of(std::string p, std::string h, NliLabel l = NliLabel::kNeutral) {
  LabeledPair r;
  r.premise = std::move(p);
  r.hypothesis = std::move(h);
  r.label = l;
  return r;
}

std::size_t count_marker(const std::string& text, const std::string& marker) {
  std::size_t n = 0;
  for (const auto& t : whitespace_tokens(text)) n += t == marker;
  return n;
}

}  // namespace

TEST_CASE("unroll_truncations: three-token premise and two-token hypothesis") {
  const auto base = pair_of("a b c", "x y", NliLabel::kContradict);
  const auto out = unroll_truncations(base);
  REQUIRE(out.size() == 4);
  CHECK(out[0].premise == "a b c");
  CHECK(out[0].hypothesis == "x y");
  CHECK(out[0].corruption.side == CorruptedSide::kNone);
  CHECK(out[1].hypothesis == "x [TRUNC]");
  CHECK(out[1].premise == "a b c");
  CHECK(out[2].premise == "a [TRUNC]");
  CHECK(out[3].premise == "a b [TRUNC]");
  CHECK(out[3].hypothesis == "x y");
  for (const auto& r : out) CHECK(r.label == NliLabel::kContradict);
}

TEST_CASE("unroll_truncations: single-token sides give only the intact pair") {
  const auto out = unroll_truncations(pair_of("a", "x"));
  REQUIRE(out.size() == 1);
  CHECK(out[0].corruption.mode == CorruptionMode::kIntact);
  CHECK_THROWS_AS(unroll_truncations(pair_of("", "x")), InvalidArgument);
}

TEST_CASE("record count is 1 + (L_h - 1) + (L_p - 1) and every prefix ends with the marker") {
  for (std::size_t lp = 1; lp <= 7; ++lp) {
    for (std::size_t lh = 1; lh <= 7; ++lh) {
      std::string p, h;
      for (std::size_t i = 0; i < lp; ++i) p += (i ? " p" : "p") + std::to_string(i);
      for (std::size_t i = 0; i < lh; ++i) h += (i ? " h" : "h") + std::to_string(i);
      const auto out = unroll_truncations(pair_of(p, h), "<cut>");
      CHECK(out.size() == 1 + (lh - 1) + (lp - 1));
      for (std::size_t i = 1; i < out.size(); ++i) {
        const auto& r = out[i];
        const bool hyp = r.corruption.side == CorruptedSide::kHypothesis;
        const auto& changed = hyp ? r.hypothesis : r.premise;
        const auto& kept = hyp ? r.premise : r.hypothesis;
        CHECK(kept == (hyp ? p : h));
        const auto toks = whitespace_tokens(changed);
        CHECK(toks.back() == "<cut>");
        CHECK(count_marker(changed, "<cut>") == 1);
        CHECK(toks.size() - 1 == static_cast<std::size_t>(r.corruption.fraction_or_cut));
        CHECK(changed.rfind(std::string(toks.front()), 0) == 0);
      }
    }
  }
}

TEST_CASE("sample_truncation adds one proper prefix and is seed-deterministic") {
  const auto base = pair_of("a b c d", "x y z");
  std::set<std::string> seen;
  for (std::size_t rec = 0; rec < 200; ++rec) {
    const auto out = sample_truncation(base, kTruncMarker, 9, rec);
    REQUIRE(out.size() == 2);
    const auto& r = out[1];
    CHECK(r.corruption.mode == CorruptionMode::kTruncate);
    const auto& changed = r.corruption.side == CorruptedSide::kPremise ? r.premise : r.hypothesis;
    CHECK(count_marker(changed, "[TRUNC]") == 1);
    seen.insert(changed);
    const auto again = sample_truncation(base, kTruncMarker, 9, rec);
    CHECK(again[1].premise == r.premise);
    CHECK(again[1].hypothesis == r.hypothesis);
  }
  CHECK(seen.size() == 5);  // 3 premise cuts + 2 hypothesis cuts
  CHECK(sample_truncation(pair_of("a", "x"), kTruncMarker, 1, 0).size() == 1);
}

TEST_CASE("mask_variants: k = 20 gives 21 records with exactly one side corrupted") {
  const auto base = pair_of("the quick brown fox jumps", "a fox leaps", NliLabel::kEntail);
  const auto out = mask_variants(base, 20, "[MASK]", 3, 0);
  REQUIRE(out.size() == 21);
  CHECK(out[0].premise == base.premise);
  CHECK(out[0].hypothesis == base.hypothesis);
  for (std::size_t j = 1; j < out.size(); ++j) {
    const auto& r = out[j];
    CHECK(r.corruption.mode == CorruptionMode::kMask);
    const bool prem = r.corruption.side == CorruptedSide::kPremise;
    CHECK((prem ? r.hypothesis : r.premise) == (prem ? base.hypothesis : base.premise));
    const auto changed = whitespace_tokens(prem ? r.premise : r.hypothesis);
    const auto orig = whitespace_tokens(prem ? base.premise : base.hypothesis);
    REQUIRE(changed.size() == orig.size());
    for (std::size_t i = 0; i < orig.size(); ++i) CHECK((changed[i] == orig[i] || changed[i] == "[MASK]"));
    CHECK(r.corruption.fraction_or_cut >= 0.0);
    CHECK(r.corruption.fraction_or_cut < 1.0);
    CHECK(r.label == NliLabel::kEntail);
  }
  CHECK(mask_variants(base, 0, "[MASK]", 3, 0).size() == 1);
}

TEST_CASE("masked fraction averages one half over 10^4 variants") {
  const auto base = pair_of("p0 p1 p2 p3 p4 p5 p6 p7", "h0 h1 h2 h3 h4 h5 h6 h7");
  double masked = 0.0;
  std::size_t premise_side = 0;
  const std::size_t k = 10000;
  const auto out = mask_variants(base, k, "[MASK]", 42, 7);
  for (std::size_t j = 1; j < out.size(); ++j) {
    const bool prem = out[j].corruption.side == CorruptedSide::kPremise;
    premise_side += prem;
    masked += static_cast<double>(count_marker(prem ? out[j].premise : out[j].hypothesis, "[MASK]")) / 8.0;
  }
  CHECK(std::abs(masked / k - 0.5) <= 0.02);
  CHECK(std::abs(static_cast<double>(premise_side) / k - 0.5) <= 0.02);
}

TEST_CASE("mask variant streams depend on seed, record and variant only") {
  const auto base = pair_of("a b c d e f", "u v w x y z");
  const auto a = mask_variants(base, 5, "[MASK]", 1, 3);
  const auto b = mask_variants(base, 8, "[MASK]", 1, 3);
  for (std::size_t j = 0; j < a.size(); ++j) {
    CHECK(a[j].premise == b[j].premise);
    CHECK(a[j].hypothesis == b[j].hypothesis);
  }
  const auto c = mask_variants(base, 5, "[MASK]", 1, 4);
  bool differs = false;
  for (std::size_t j = 1; j < a.size(); ++j) differs |= a[j].corruption.fraction_or_cut != c[j].corruption.fraction_or_cut;
  CHECK(differs);
}

TEST_CASE("label and enum names") {
  CHECK(parse_nli_label("entailment") == NliLabel::kEntail);
  CHECK(parse_nli_label(to_string(NliLabel::kContradict)) == NliLabel::kContradict);
  CHECK_THROWS_AS(parse_nli_label("maybe"), InvalidArgument);
  CHECK(to_string(CorruptedSide::kHypothesis) == "hypothesis");
  CHECK(to_string(CorruptionMode::kMask) == "mask");
}
