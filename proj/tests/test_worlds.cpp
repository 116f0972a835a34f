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

#include <cmath>
#include <map>
#include <numeric>

#include "semsteer/error.hpp"
#include "semsteer/worlds.hpp"
#include "support/reference.hpp"

using namespace semsteer;

namespace {

double total(const std::map<std::vector<TokenId>, double>& d) {
  double s = 0.0;
  for (const auto& [k, p] : d) s += p;
  return s;
}

std::shared_ptr<ArmWorld> two_token_uniform() {
  return std::make_shared<ArmWorld>(
      Vocab::with_content({"a", "b"}), 1, [](std::span<const TokenId>) { return std::vector<double>{0.0, 0.0, 0.0}; },
      [](std::span<const TokenId> t) { return t.front() == 4 ? 0 : 1; }, 2);
}

}  // namespace

TEST_CASE("enumerate_distribution: 2-token uniform world of length 1") {
  const auto w = two_token_uniform();
  const auto d = enumerate_distribution(*w);
  REQUIRE(d.size() == 2);
  CHECK(d.at({4, 1}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(d.at({5, 1}) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("enumerate_distribution: point mass") {
  const auto w = make_point_mass_world(3);
  const auto d = enumerate_distribution(*w);
  REQUIRE(d.size() == 1);
  CHECK(d.begin()->second == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(d.begin()->first.size() == 4);
}

TEST_CASE("enumerate_distribution matches Monte Carlo frequencies within 3 sigma") {
  const auto w = make_random_arm_world({4, 3, 3, 17, 1.5, 0.0, 0});
  const auto d = enumerate_distribution(*w);
  CHECK(std::abs(total(d) - 1.0) <= 1e-12);
  std::map<std::vector<TokenId>, std::size_t> counts;
  std::mt19937_64 rng(2024);
  const std::size_t draws = 1000000;
  for (std::size_t i = 0; i < draws; ++i) ++counts[ref::vanilla_arm(*w, rng).tokens];
  std::size_t outside = 0;
  for (const auto& [seq, p] : d) {
    const double sigma = std::sqrt(p * (1 - p) / draws);
    const double f = static_cast<double>(counts[seq]) / draws;
    if (std::abs(f - p) > 3 * sigma) ++outside;
  }
  for (const auto& [seq, c] : counts) CHECK(d.count(seq) == 1);
  // At 3 sigma about 0.3% of cells fall outside by chance.
  CHECK(outside <= std::max<std::size_t>(2, d.size() / 100));
}

TEST_CASE("enumeration refuses oversized worlds and reports the bound") {
  try {
    ArmWorld w(Vocab::with_content({"a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l", "m", "n", "o", "p"}), 6,
               [](std::span<const TokenId>) { return std::vector<double>(17, 0.0); },
               [](std::span<const TokenId>) { return 0; }, 1);
    FAIL("expected an enumeration error");
  } catch (const EnumerationError& e) {
    CHECK(e.bound() > kEnumerationLimit);
  }
}

TEST_CASE("exact_cluster_probs: one cluster, symmetric pair, asymmetric triple") {
  const auto one = make_point_mass_world(2);
  CHECK(exact_cluster_probs(*one) == std::vector<double>{1.0});

  const auto sym = two_token_uniform();
  const auto p2 = exact_cluster_probs(*sym);
  CHECK(p2[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p2[1] == doctest::Approx(0.5).epsilon(1e-15));

  const auto w = make_random_arm_world({5, 3, 3, 99, 2.0, 0.0, 1});
  const auto p3 = exact_cluster_probs(*w);
  std::vector<long double> brute(3, 0.0L);
  for (const auto& [seq, p] : enumerate_distribution(*w)) brute[w->label(seq)] += p;
  for (int c = 0; c < 3; ++c) CHECK(std::abs(p3[c] - static_cast<double>(brute[c])) <= 1e-13);
  CHECK(std::accumulate(p3.begin(), p3.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("synthetic conditionals are normalized for every prefix") {
  const auto w = make_random_arm_world({6, 4, 3, 7, 1.5, 0.0, 1});
  std::vector<std::vector<TokenId>> prefixes{{}};
  for (const auto& [seq, p] : w->distribution()) {
    for (std::size_t k = 1; k < seq.size(); ++k) prefixes.emplace_back(seq.begin(), seq.begin() + k);
  }
  for (const auto& pre : prefixes) {
    const auto probs = ref::probs_of(w->next_token_logits(pre));
    const long double s = std::accumulate(probs.begin(), probs.end(), 0.0L);
    CHECK(std::abs(static_cast<double>(s) - 1.0) <= 1e-9);
  }
}

TEST_CASE("MDM trajectory marginal matches ancestral simulation within 3 sigma") {
  for (const auto order : {ScheduleOrder::kLeftToRight, ScheduleOrder::kRandom}) {
    const auto w = make_random_mdm_world({4, 3, 3, 5, 1.5, 0, order});
    for (const int steps : {1, 2, 3}) {
      const auto d = w->trajectory_marginal(steps);
      CHECK(std::abs(total(d) - 1.0) <= 1e-12);
      std::map<std::vector<TokenId>, std::size_t> counts;
      std::mt19937_64 rng(77 + steps);
      const std::size_t draws = 100000;
      for (std::size_t i = 0; i < draws; ++i) ++counts[ref::vanilla_mdm(*w, steps, rng).tokens];
      std::size_t outside = 0;
      for (const auto& [seq, p] : d) {
        const double sigma = std::sqrt(p * (1 - p) / draws);
        if (std::abs(static_cast<double>(counts[seq]) / draws - p) > 3 * sigma) ++outside;
      }
      CHECK(outside <= std::max<std::size_t>(2, d.size() / 100));
    }
  }
}

TEST_CASE("MDM schedule fills every position exactly once") {
  const auto w = make_random_mdm_world({4, 5, 3, 8, 1.5, 0, ScheduleOrder::kRandom});
  std::mt19937_64 rng(1);
  for (const int steps : {1, 2, 3, 5, 7}) {
    std::vector<TokenId> state(5, w->mask_id());
    std::vector<int> filled(5, 0);
    for (int t = steps; t >= 1; --t) {
      const auto pos = w->schedule(state, t, rng);
      CHECK(std::is_sorted(pos.begin(), pos.end()));
      for (const auto p : pos) {
        ++filled[p];
        state[p] = 4;
      }
    }
    for (const int f : filled) CHECK(f == 1);
  }
}

TEST_CASE("fills_this_step spreads masks over the remaining steps") {
  CHECK(fills_this_step(3, 3) == 1);
  CHECK(fills_this_step(5, 2) == 3);
  CHECK(fills_this_step(2, 1) == 2);
  CHECK(fills_this_step(0, 4) == 0);
}

TEST_CASE("ArmWorld labels partial and complete texts") {
  const auto w = make_opener_world({0.25, 0.25, 0.25, 0.25});
  const auto& d = w->distribution();
  const auto& full = d.begin()->first;
  const std::string text = w->decode(full);
  const int c = w->label(full);
  CHECK(w->consistent_labels(text) == (LabelMask{1} << c));
  // The opener alone is compatible with every cluster.
  const std::string opener = w->decode(std::span<const TokenId>(full).first(1));
  CHECK(std::popcount(w->consistent_labels(opener + " [TRUNC]")) == 4);
  CHECK_THROWS_AS(w->consistent_labels("not a word"), ScoringError);
}

TEST_CASE("pair worlds: copy channel and independence") {
  const auto first = make_categorical_world({0.25, 0.25, 0.25, 0.25});
  const auto copy = make_copy_pair_world(first);
  CHECK(copy->exact_mutual_information() == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  const auto ind = make_independent_pair_world(first, make_categorical_world({0.3, 0.7}));
  CHECK(std::abs(ind->exact_mutual_information()) <= 1e-12);
  const auto jp = ind->exact_joint_cluster_probs();
  CHECK(jp.size() == 8);
  CHECK(jp[0] == doctest::Approx(0.25 * 0.3));
  CHECK(jp[7] == doctest::Approx(0.25 * 0.7));
}

TEST_CASE("pair world text forms") {
  const auto first = make_categorical_world({0.5, 0.5});
  const auto second = make_categorical_world({0.5, 0.5});
  const auto ind = make_independent_pair_world(first, second);
  const auto& d = first->distribution();
  const auto a = first->decode(d.begin()->first);
  const auto b = first->decode(std::next(d.begin())->first);
  const int la = first->label(d.begin()->first);
  const int lb = first->label(std::next(d.begin())->first);
  CHECK(ind->consistent_labels(a + " || " + b) == (LabelMask{1} << (la * 2 + lb)));
  // Lone answers use their own label ranges so they never match pairs.
  CHECK(ind->consistent_labels(a) == (LabelMask{1} << (4 + la)));
  CHECK(ind->consistent_labels("|| " + b) == (LabelMask{1} << (4 + 2 + lb)));
  CHECK(ind->second_labels(b) == (LabelMask{1} << lb));
}
