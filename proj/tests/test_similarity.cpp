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

#include <random>

#include "semsteer/error.hpp"
#include "semsteer/similarity.hpp"
#include "semsteer/worlds.hpp"
#include "support/reference.hpp"

using namespace semsteer;

namespace {

void fill_symmetric(ref::TableScorer& s, const std::string& cand,
                    const std::vector<std::pair<std::string, double>>& pool) {
  for (const auto& [text, e] : pool) {
    s.entail[{cand, text}] = e;
    s.entail[{text, cand}] = e;
  }
}

}  // namespace

TEST_CASE("bidirectional_score examples") {
  ref::TableScorer s;
  s.entail[{"a", "b"}] = 1.0;
  s.entail[{"b", "a"}] = 1.0;
  CHECK(bidirectional_score(s, "a", "b") == 1.0);
  s.entail[{"a", "b"}] = 0.0;
  s.entail[{"b", "a"}] = 0.0;
  CHECK(bidirectional_score(s, "a", "b") == 0.0);
  s.entail[{"a", "b"}] = 0.8;
  s.entail[{"b", "a"}] = 0.4;
  CHECK(bidirectional_score(s, "a", "b") == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("bidirectional_score is exactly symmetric") {
  ref::TableScorer s;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const std::string a = "x" + std::to_string(i);
    const std::string b = "y" + std::to_string(i);
    s.entail[{a, b}] = u(rng);
    s.entail[{b, a}] = u(rng);
    CHECK(bidirectional_score(s, a, b) == bidirectional_score(s, b, a));
  }
}

TEST_CASE("bidirectional_score rejects empty texts with both texts attached") {
  ref::TableScorer s;
  try {
    bidirectional_score(s, "", "b");
    FAIL("expected a scoring error");
  } catch (const ScoringError& e) {
    CHECK(e.premise().empty());
    CHECK(e.hypothesis() == "b");
  }
}

TEST_CASE("penalty examples") {
  ref::TableScorer s;
  fill_symmetric(s, "c", {{"p", 0.2}, {"q", 0.9}});
  CHECK(penalty(s, "c", std::vector<std::string>{}, Aggregation::kMax) == 0.0);
  const std::vector<std::string> pool{"p", "q"};
  CHECK(penalty(s, "c", pool, Aggregation::kMax) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(penalty(s, "c", pool, Aggregation::kMean) == doctest::Approx(0.55).epsilon(1e-15));
  CHECK(penalty(s, "c", pool, Aggregation::kMedian) == doctest::Approx(0.55).epsilon(1e-15));
}

TEST_CASE("aggregate handles odd medians and the empty list") {
  CHECK(aggregate({0.1, 0.7, 0.3}, Aggregation::kMedian) == doctest::Approx(0.3));
  CHECK(aggregate({}, Aggregation::kMean) == 0.0);
}

TEST_CASE("MAX penalty is monotone in each pool score") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> scores(5);
    for (auto& v : scores) v = u(rng);
    const double before = aggregate(scores, Aggregation::kMax);
    scores[rep % 5] = std::min(1.0, scores[rep % 5] + u(rng));
    CHECK(aggregate(scores, Aggregation::kMax) >= before);
  }
}

TEST_CASE("mark_partial appends the marker once and only to unfinished text") {
  CHECK(mark_partial("a b", PartialMarking::kTruncSuffix, false) == "a b [TRUNC]");
  CHECK(mark_partial("a b [TRUNC]", PartialMarking::kTruncSuffix, false) == "a b [TRUNC]");
  CHECK(mark_partial("a b", PartialMarking::kTruncSuffix, true) == "a b");
  CHECK(mark_partial("a [MASK]", PartialMarking::kMaskInline, false) == "a [MASK]");
  CHECK(mark_partial("a", PartialMarking::kNone, false) == "a");
}

TEST_CASE("parse helpers round-trip") {
  for (const auto m : {PartialMarking::kTruncSuffix, PartialMarking::kMaskInline, PartialMarking::kNone}) {
    CHECK(parse_marking(to_string(m)) == m);
  }
  for (const auto a : {Aggregation::kMax, Aggregation::kMean, Aggregation::kMedian}) {
    CHECK(parse_aggregation(to_string(a)) == a);
  }
  CHECK_THROWS_AS(parse_marking("bogus"), InvalidArgument);
}

TEST_CASE("oracle scorer examples") {
  const auto w = make_opener_world({0.25, 0.25, 0.25, 0.25});
  std::vector<std::vector<TokenId>> seqs;
  for (const auto& [s, p] : w->distribution()) seqs.push_back(s);
  const auto find_pair = [&](bool same) {
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      for (std::size_t j = i + 1; j < seqs.size(); ++j) {
        if ((w->label(seqs[i]) == w->label(seqs[j])) == same) {
          return std::make_pair(w->decode(seqs[i]), w->decode(seqs[j]));
        }
      }
    }
    FAIL("no pair");
    return std::make_pair(std::string(), std::string());
  };
  const auto [s1, s2] = find_pair(true);
  const auto [d1, d2] = find_pair(false);

  const auto exact = oracle_scorer(w, 0.0);
  CHECK(exact->entail(s1, s2) == 1.0);
  CHECK(exact->classify(s1, s2).entails());

  const auto noisy = oracle_scorer(w, 0.1);
  CHECK(noisy->entail(d1, d2) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK_FALSE(noisy->classify(d1, d2).entails());

  const std::string partial = w->decode(std::span<const TokenId>(seqs.front()).first(1)) + " [TRUNC]";
  CHECK(exact->entail(partial, s1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK_FALSE(exact->classify(partial, s1).entails());

  CHECK_THROWS_AS(exact->entail("zzz", s1), ScoringError);
  CHECK_THROWS_AS(oracle_scorer(w, 0.5), InvalidArgument);
}

TEST_CASE("noise-free oracle induces the world partition at any threshold") {
  const auto w = make_random_arm_world({5, 3, 3, 31, 1.5, 0.0, 0});
  const auto scorer = oracle_scorer(w, 0.0);
  std::vector<std::vector<TokenId>> seqs;
  for (const auto& [s, p] : w->distribution()) seqs.push_back(s);
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> pick(0, seqs.size() - 1);
  for (int rep = 0; rep < 300; ++rep) {
    const auto& a = seqs[pick(rng)];
    const auto& b = seqs[pick(rng)];
    const double e = bidirectional_score(*scorer, w->decode(a), w->decode(b));
    for (const double tau : {0.01, 0.3, 0.5, 0.99}) CHECK((e >= tau) == (w->label(a) == w->label(b)));
  }
}

TEST_CASE("SteeringPool agrees with direct penalties and scores each pair once") {
  const auto w = make_random_arm_world({5, 3, 3, 12, 1.5, 0.0, 0});
  const auto oracle = oracle_scorer(w, 0.05);
  std::vector<std::string> texts;
  for (const auto& [s, p] : w->distribution()) texts.push_back(w->decode(s));
  for (const auto agg : {Aggregation::kMax, Aggregation::kMean, Aggregation::kMedian}) {
    SteeringPool pool(*oracle, agg);
    std::vector<std::string> added;
    for (std::size_t k = 0; k < 6; ++k) {
      const std::string t = texts[(k * 7) % texts.size()];
      pool.add(t);
      added.push_back(t);
      if (k % 2 == 0) {
        pool.add(t);  // duplicates count in the aggregate
        added.push_back(t);
      }
      const std::vector<std::string> cands{texts[k], texts[k + 1], texts[(k * 3) % texts.size()]};
      const auto got = pool.penalties(cands);
      for (std::size_t i = 0; i < cands.size(); ++i) {
        CHECK(got[i] == doctest::Approx(penalty(*oracle, cands[i], added, agg)).epsilon(1e-12));
      }
    }
    CHECK(pool.size() == added.size());
  }

  ref::TableScorer counting;
  counting.fallback = 0.5;
  SteeringPool pool(counting, Aggregation::kMax);
  pool.add("a");
  pool.add("b");
  pool.penalties(std::vector<std::string>{"x", "y"});
  const std::size_t first = counting.calls;
  CHECK(first == 8);
  pool.penalties(std::vector<std::string>{"x", "y"});
  CHECK(counting.calls == first);
  pool.add("c");
  pool.penalties(std::vector<std::string>{"x"});
  CHECK(counting.calls == first + 2);
}
