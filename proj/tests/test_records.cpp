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
#include <fstream>

#include "semsteer/records.hpp"
#include "semsteer/sampler_arm.hpp"
#include "semsteer/sampler_mdm.hpp"
#include "semsteer/worlds.hpp"
#include "support/reference.hpp"

using namespace semsteer;
using nlohmann::json;

TEST_CASE("ARM and MDM samples round-trip through JSON") {
  const auto aw = make_random_arm_world({5, 3, 3, 4, 1.5, 0.0, 0});
  const auto mw = make_random_mdm_world({5, 3, 3, 4, 1.5, 0, ScheduleOrder::kRandom});
  const auto ao = oracle_scorer(aw, 0.0);
  const auto mo = oracle_scorer(mw, 0.0);
  ArmSamplerConfig acfg;
  acfg.lambda0 = 0.7;
  MdmSamplerConfig mcfg;
  mcfg.lambda0 = 0.7;
  mcfg.steps = 2;
  SteeringPool ap(*ao, Aggregation::kMax), mp(*mo, Aggregation::kMax);
  Rng rng(2);
  const auto a = ArmSampler(*aw, acfg).sample_set(ap, 6, rng);
  const auto m = MdmSampler(*mw, mcfg).sample_set(mp, 6, rng);
  for (const auto* set : {&a, &m}) {
    for (const auto& s : set->samples()) {
      const auto back = sample_from_json(json::parse(to_json(s).dump()));
      CHECK(back.sequence.tokens == s.sequence.tokens);
      CHECK(back.sequence.text == s.sequence.text);
      CHECK(back.origin == s.origin);
      CHECK(back.logp == doctest::Approx(s.logp).epsilon(1e-15));
      CHECK(back.logq == doctest::Approx(s.logq).epsilon(1e-15));
      REQUIRE(back.steps.size() == s.steps.size());
      for (std::size_t i = 0; i < s.steps.size(); ++i) {
        CHECK(back.steps[i].token == s.steps[i].token);
        CHECK(back.steps[i].lambda == s.steps[i].lambda);
        CHECK(back.steps[i].position == s.steps[i].position);
        CHECK(back.steps[i].denoise_step == s.steps[i].denoise_step);
      }
    }
  }
}

TEST_CASE("sample_from_json rejects inconsistent totals and unknown origins") {
  SequenceSample s;
  s.sequence = {{4}, "a"};
  TokenStep st;
  st.token = 4;
  st.logp_base = -0.5;
  st.logq_proposal = -0.25;
  s.steps.push_back(st);
  finalize_sample(s);
  auto j = to_json(s);
  j["logp"] = -0.4;
  CHECK_THROWS_AS(sample_from_json(j), InvalidArgument);
  j = to_json(s);
  j["origin"] = "rnn";
  CHECK_THROWS_AS(sample_from_json(j), InvalidArgument);
  // Unknown entropy is written as null and read back as NaN.
  s.steps[0].base_entropy = std::nan("");
  j = to_json(s);
  CHECK(j["steps"][0]["entropy"].is_null());
  CHECK(std::isnan(sample_from_json(j).steps[0].base_entropy));
}

TEST_CASE("reports and labeled pairs round-trip") {
  EstimateReport r;
  r.prompt_id = "q1";
  r.task = "mi";
  r.n = 3;
  r.se = 0.5;
  r.mi = 0.25;
  r.history = {0.0, 0.2, 0.25};
  r.assignment = {0, 1, 0};
  r.representatives = {0, 1};
  r.cluster_sizes = {2, 1};
  r.cv_mode = "weighted_mean";
  r.best_answer = "a || b";
  r.oracle_value = 0.3;
  const auto back = report_from_json(json::parse(report_record(r).dump()));
  CHECK(back.prompt_id == "q1");
  CHECK(back.mi == 0.25);
  CHECK(back.history == r.history);
  CHECK(back.assignment == r.assignment);
  CHECK(back.oracle_value == r.oracle_value);
  r.oracle_value.reset();
  CHECK_FALSE(report_from_json(to_json(r)).oracle_value.has_value());

  LabeledPair p{"a b", "c", NliLabel::kNeutral, {CorruptedSide::kPremise, CorruptionMode::kTruncate, 1.0}};
  const auto j = to_json(p);
  CHECK(j["corruption"]["side"] == "premise");
  CHECK(j["tokenization"] == "whitespace");
  const auto lp = labeled_pair_from_json(j);
  CHECK(lp.premise == "a b");
  CHECK(lp.label == NliLabel::kNeutral);
}

TEST_CASE("read_jsonl reports the byte offset of a bad line") {
  ref::TempDir dir("records");
  const auto path = dir.file("t.jsonl");
  {
    std::ofstream out(path);
    out << "{\"a\":1}\n\n{\"b\":2}\n{oops\n";
  }
  try {
    read_jsonl(path);
    FAIL("expected a corrupt trace");
  } catch (const CorruptTrace& e) {
    CHECK(e.offset() == 17);
    CHECK(e.file() == path);
  }
  {
    std::ofstream out(path, std::ios::trunc);
    out << "{\"a\":1}\n\n{\"b\":2}";
  }
  const auto recs = read_jsonl(path);
  REQUIRE(recs.size() == 2);
  CHECK(recs[1].offset == 9);
  CHECK(recs[1].value["b"] == 2);
  CHECK_THROWS_AS(read_jsonl(dir.file("missing.jsonl")), InvalidArgument);
}

TEST_CASE("create_output refuses to overwrite") {
  ref::TempDir dir("records");
  const auto path = dir.file("o.jsonl");
  { auto out = create_output(path); out << "x\n"; }
  CHECK_THROWS_AS(create_output(path), InvalidArgument);
}

TEST_CASE("expect_kind checks schema and kind") {
  Record r{5, json{{"schema", std::string(kRecordSchema)}, {"kind", "sample"}}};
  CHECK_NOTHROW(expect_kind(r, "f", "sample"));
  CHECK_THROWS_AS(expect_kind(r, "f", "pair"), CorruptTrace);
  r.value["schema"] = "other/9";
  CHECK_THROWS_AS(expect_kind(r, "f", "sample"), CorruptTrace);
}
