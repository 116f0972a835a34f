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
#include <numeric>
#include <random>

#include "semsteer/domain.hpp"
#include "semsteer/error.hpp"
#include "support/reference.hpp"

using namespace semsteer;

TEST_CASE("normalize_weights: identical ratios are uniform") {
  const std::vector<double> r{0, 0, 0, 0};
  const auto w = normalize_weights(r);
  for (const double v : w) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("normalize_weights: [0, ln 3]") {
  const std::vector<double> r{0.0, std::log(3.0)};
  const auto w = normalize_weights(r);
  CHECK(w[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(w[1] == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("normalize_weights matches extended-precision exponentiation") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::vector<double> r(1000);
  for (auto& v : r) v = u(rng);
  const auto w = normalize_weights(r);
  const auto oracle = ref::normalize(r);
  double sum = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    sum += w[i];
    if (oracle[i] > 1e-300L) {
      CHECK(std::abs((static_cast<long double>(w[i]) - oracle[i]) / oracle[i]) <= 1e-10L);
    }
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("normalize_weights is stable across hundreds of nats") {
  const std::vector<double> r{-800.0, -900.0, -800.0 + std::log(3.0)};
  const auto w = normalize_weights(r);
  CHECK(w[0] == doctest::Approx(0.25));
  CHECK(w[2] == doctest::Approx(0.75));
  CHECK(w[1] >= 0.0);
  CHECK(w[1] < 1e-40);
}

TEST_CASE("normalize_weights is invariant under a constant shift") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 5.0);
  std::vector<double> r(50), s(50);
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = g(rng);
    s[i] = r[i] + 123.456;
  }
  const auto a = normalize_weights(r);
  const auto b = normalize_weights(s);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("normalize_weights errors") {
  CHECK_THROWS_WITH_AS(normalize_weights(std::vector<double>{}), "empty sample set", InvalidArgument);
  CHECK_THROWS_WITH_AS(normalize_weights(std::vector<double>{0.0, NAN}), "non-finite log ratio", InvalidArgument);
}

TEST_CASE("effective_sample_size examples") {
  CHECK(effective_sample_size(std::vector<double>(16, 1.0 / 16)) == doctest::Approx(16.0).epsilon(1e-14));
  CHECK(effective_sample_size(std::vector<double>{1, 0, 0, 0}) == 1.0);
  CHECK(effective_sample_size(std::vector<double>{0.5, 0.25, 0.25}) == doctest::Approx(1.0 / 0.375).epsilon(1e-14));
  CHECK(1.0 / 0.375 == doctest::Approx(2.6667).epsilon(1e-4));
}

TEST_CASE("effective_sample_size rejects unnormalized weights") {
  CHECK_THROWS_AS(effective_sample_size(std::vector<double>{0.5, 0.6}), InvalidArgument);
  CHECK_THROWS_AS(effective_sample_size(std::vector<double>{}), InvalidArgument);
  CHECK_THROWS_AS(effective_sample_size(std::vector<double>{1.5, -0.5}), InvalidArgument);
}

TEST_CASE("ESS/N lies in (0, 1] and equals 1 only for equal weights") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> r(20);
    for (auto& v : r) v = g(rng);
    const double ratio = effective_sample_size(normalize_weights(r)) / 20.0;
    CHECK(ratio > 0.0);
    CHECK(ratio < 1.0);
  }
}

TEST_CASE("log_sum_exp and log_softmax") {
  const double ninf = -std::numeric_limits<double>::infinity();
  CHECK(log_sum_exp(std::vector<double>{ninf, ninf}) == ninf);
  CHECK(log_sum_exp(std::vector<double>{1000.0, 1000.0}) == doctest::Approx(1000.0 + std::log(2.0)));
  const auto ls = log_softmax(std::vector<double>{0.0, ninf, std::log(3.0)});
  CHECK(std::exp(ls[0]) == doctest::Approx(0.25));
  CHECK(ls[1] == ninf);
  CHECK(std::exp(ls[2]) == doctest::Approx(0.75));
  CHECK_THROWS_AS(log_softmax(std::vector<double>{ninf}), InvalidArgument);
}

TEST_CASE("entropy_from_logprobs") {
  const std::vector<double> lp{std::log(0.5), std::log(0.5), -std::numeric_limits<double>::infinity()};
  CHECK(entropy_from_logprobs(lp) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("Vocab reserves markers and round-trips text") {
  const Vocab v = Vocab::with_content({"a", "b", "c"});
  CHECK(v.size() == 7);
  CHECK(v.piece(v.reserved().mask) == std::string(kMaskMarker));
  CHECK(v.piece(v.reserved().trunc) == std::string(kTruncMarker));
  CHECK(v.is_reserved(v.reserved().eos));
  CHECK_FALSE(v.is_reserved(4));
  CHECK(v.content_ids() == std::vector<TokenId>{4, 5, 6});
  const std::vector<TokenId> toks{0, 4, 6, 2, 1};
  CHECK(v.decode(toks) == "a c [MASK]");
  CHECK(v.encode("a c [MASK]") == std::vector<TokenId>{4, 6, 2});
  CHECK_THROWS_AS(v.encode("a z"), InvalidArgument);
  CHECK_THROWS_AS(Vocab::with_content({"a", "a"}), InvalidArgument);
  CHECK_THROWS_AS(v.piece(99), InvalidArgument);
}

TEST_CASE("finalize_sample and SamplePair::make sum the steps") {
  SequenceSample s;
  s.steps.push_back({4, -0.5, -0.7, 0.1, 0.0, 0.0, -1, -1});
  s.steps.push_back({1, -0.25, -0.1, 0.2, 0.3, 0.0, -1, -1});
  finalize_sample(s);
  CHECK(s.logp == doctest::Approx(-0.75));
  CHECK(s.logq == doctest::Approx(-0.8));
  CHECK(s.log_weight() == doctest::Approx(0.05));
  SequenceSample t = s;
  const SamplePair p = SamplePair::make(s, t);
  CHECK(p.logp_joint == doctest::Approx(-1.5));
  CHECK(p.logq_joint == doctest::Approx(-1.6));
}

TEST_CASE("entropy_compensator is NaN when a step lacks its entropy") {
  SequenceSample s;
  s.steps.push_back({4, -0.5, -0.5, 0.0, 0.0, 0.3, -1, -1});
  s.steps.push_back({1, -0.5, -0.5, 0.0, 0.0, 0.4, -1, -1});
  CHECK(s.entropy_compensator() == doctest::Approx(0.7));
  s.steps[1].base_entropy = std::numeric_limits<double>::quiet_NaN();
  CHECK(std::isnan(s.entropy_compensator()));
}

TEST_CASE("WeightedSet keeps weights in step with its samples") {
  SampleSet set;
  for (int i = 0; i < 3; ++i) {
    SequenceSample s;
    s.logp = -1.0;
    s.logq = -1.0 - i * std::log(2.0);
    set.push_back(s);
  }
  CHECK(set.size() == 3);
  const auto& w = set.normalized_weights();
  CHECK(w[0] == doctest::Approx(1.0 / 7));
  CHECK(w[1] == doctest::Approx(2.0 / 7));
  CHECK(w[2] == doctest::Approx(4.0 / 7));
  CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(set.weights()[2] == doctest::Approx(4.0));
  CHECK(set.ess() == doctest::Approx(49.0 / 21.0));
}
