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

#include "semsteer/records.hpp"

#include <cmath>
#include <limits>

namespace semsteer {

using nlohmann::json;

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_of(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return v.get<double>();
}

}  // namespace

std::vector<Record> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::vector<Record> out;
  std::string line;
  std::uint64_t offset = 0;
  while (std::getline(in, line)) {
    const std::uint64_t start = offset;
    offset += line.size() + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back({start, json::parse(line)});
    } catch (const json::exception& e) {
      throw CorruptTrace(path.string(), start, e.what());
    }
  }
  return out;
}

std::ofstream create_output(const std::filesystem::path& path) {
  if (std::filesystem::exists(path)) throw InvalidArgument("refusing to overwrite " + path.string());
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot create " + path.string());
  return out;
}

json to_json(const TokenStep& s, Origin origin) {
  json j = {{"token", s.token},       {"logp", number(s.logp_base)}, {"logq", number(s.logq_proposal)},
            {"penalty", s.penalty},   {"lambda", s.lambda},          {"entropy", number(s.base_entropy)}};
  if (origin == Origin::kMdm) {
    j["step"] = s.denoise_step;
    j["position"] = s.position;
  }
  return j;
}

json to_json(const SequenceSample& s) {
  json steps = json::array();
  for (const auto& st : s.steps) steps.push_back(to_json(st, s.origin));
  return {{"origin", s.origin == Origin::kArm ? "arm" : "mdm"},
          {"tokens", s.sequence.tokens},
          {"text", s.sequence.text},
          {"logp", s.logp},
          {"logq", s.logq},
          {"log_weight", s.log_weight()},
          {"truncated", s.truncated},
          {"steps", steps}};
}

SequenceSample sample_from_json(const json& j) {
  SequenceSample s;
  const std::string origin = j.at("origin").get<std::string>();
  if (origin != "arm" && origin != "mdm") throw InvalidArgument("unknown origin '" + origin + "'");
  s.origin = origin == "arm" ? Origin::kArm : Origin::kMdm;
  s.sequence.tokens = j.at("tokens").get<std::vector<TokenId>>();
  s.sequence.text = j.at("text").get<std::string>();
  s.truncated = j.value("truncated", false);
  for (const auto& js : j.at("steps")) {
    TokenStep st;
    st.token = js.at("token").get<TokenId>();
    st.logp_base = number_of(js, "logp");
    st.logq_proposal = number_of(js, "logq");
    st.penalty = js.at("penalty").get<double>();
    st.lambda = js.at("lambda").get<double>();
    st.base_entropy = number_of(js, "entropy");
    st.denoise_step = js.value("step", -1);
    st.position = js.value("position", -1);
    s.steps.push_back(st);
  }
  finalize_sample(s);
  if (std::abs(s.logp - j.at("logp").get<double>()) > 1e-9 || std::abs(s.logq - j.at("logq").get<double>()) > 1e-9) {
    throw InvalidArgument("sample log-probabilities disagree with its steps");
  }
  return s;
}

json to_json(const EstimateReport& r) {
  json j = {{"prompt_id", r.prompt_id},
            {"task", r.task},
            {"n", r.n},
            {"se", r.se},
            {"se_cv", r.se_cv},
            {"mi", r.mi},
            {"mi_cv", r.mi_cv},
            {"alpha_se", r.alpha_se},
            {"alpha_mi", r.alpha_mi},
            {"ess", r.ess},
            {"n_clusters", r.n_clusters},
            {"stopped_early", r.stopped_early},
            {"history", r.history},
            {"assignment", r.assignment},
            {"representatives", r.representatives},
            {"cluster_sizes", r.cluster_sizes},
            {"cv_mode", r.cv_mode},
            {"best_answer", r.best_answer}};
  j["oracle_value"] = r.oracle_value ? json(*r.oracle_value) : json(nullptr);
  return j;
}

EstimateReport report_from_json(const json& j) {
  EstimateReport r;
  r.prompt_id = j.at("prompt_id").get<std::string>();
  r.task = j.at("task").get<std::string>();
  r.n = j.at("n").get<std::size_t>();
  r.se = j.at("se").get<double>();
  r.se_cv = j.at("se_cv").get<double>();
  r.mi = j.at("mi").get<double>();
  r.mi_cv = j.at("mi_cv").get<double>();
  r.alpha_se = j.at("alpha_se").get<double>();
  r.alpha_mi = j.at("alpha_mi").get<double>();
  r.ess = j.at("ess").get<double>();
  r.n_clusters = j.at("n_clusters").get<std::size_t>();
  r.stopped_early = j.at("stopped_early").get<bool>();
  r.history = j.at("history").get<std::vector<double>>();
  r.assignment = j.at("assignment").get<std::vector<int>>();
  r.representatives = j.at("representatives").get<std::vector<std::size_t>>();
  r.cluster_sizes = j.at("cluster_sizes").get<std::vector<std::size_t>>();
  r.cv_mode = j.at("cv_mode").get<std::string>();
  r.best_answer = j.at("best_answer").get<std::string>();
  if (j.contains("oracle_value") && !j.at("oracle_value").is_null()) r.oracle_value = j.at("oracle_value").get<double>();
  return r;
}

json to_json(const LabeledPair& p) {
  return {{"premise", p.premise},
          {"hypothesis", p.hypothesis},
          {"label", std::string(to_string(p.label))},
          {"corruption",
           {{"side", std::string(to_string(p.corruption.side))},
            {"mode", std::string(to_string(p.corruption.mode))},
            {"fraction_or_cut", p.corruption.fraction_or_cut}}},
          {"tokenization", "whitespace"}};
}

LabeledPair labeled_pair_from_json(const json& j) {
  LabeledPair p;
  p.premise = j.at("premise").get<std::string>();
  p.hypothesis = j.at("hypothesis").get<std::string>();
  p.label = parse_nli_label(j.at("label").get<std::string>());
  return p;
}

json sample_record(const std::string& prompt_id, std::size_t index, const SequenceSample& sample,
                   double normalized_weight) {
  return {{"schema", kRecordSchema}, {"kind", "sample"},   {"prompt_id", prompt_id},
          {"index", index},          {"sample", to_json(sample)}, {"normalized_weight", normalized_weight}};
}

json pair_record(const std::string& prompt_id, std::size_t index, const SamplePair& pair, double normalized_weight) {
  return {{"schema", kRecordSchema},
          {"kind", "pair"},
          {"prompt_id", prompt_id},
          {"index", index},
          {"first", to_json(pair.first)},
          {"second", to_json(pair.second)},
          {"logp_joint", pair.logp_joint},
          {"logq_joint", pair.logq_joint},
          {"normalized_weight", normalized_weight}};
}

json report_record(const EstimateReport& report) {
  json j = to_json(report);
  j["schema"] = kRecordSchema;
  j["kind"] = "report";
  return j;
}

void expect_kind(const Record& r, const std::string& file, std::string_view kind) {
  if (!r.value.is_object() || r.value.value("schema", "") != kRecordSchema) {
    throw CorruptTrace(file, r.offset, "missing or unknown schema");
  }
  if (r.value.value("kind", "") != kind) throw CorruptTrace(file, r.offset, "expected a '" + std::string(kind) + "' record");
}

}  // namespace semsteer
