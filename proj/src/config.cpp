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

#include "semsteer/config.hpp"

#include <cmath>

#include "semsteer/records.hpp"

namespace semsteer {

using nlohmann::json;

namespace {

template <class T>
T field(const json& j, const std::string& path, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + key, "has the wrong type");
  }
}

double sequence_entropy(const std::map<std::vector<TokenId>, double>& dist) {
  double h = 0.0;
  for (const auto& [seq, p] : dist) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

RandomArmParams arm_params(const json& s, const std::string& path) {
  RandomArmParams p;
  p.vocab = field<std::size_t>(s, path, "vocab", p.vocab);
  p.max_length = field<std::size_t>(s, path, "max_length", p.max_length);
  p.clusters = field<std::size_t>(s, path, "clusters", p.clusters);
  p.seed = field<std::uint64_t>(s, path, "seed", p.seed);
  p.logit_scale = field<double>(s, path, "logit_scale", p.logit_scale);
  p.eos_bias = field<double>(s, path, "eos_bias", p.eos_bias);
  p.label_position = field<std::size_t>(s, path, "label_position", p.label_position);
  return p;
}

std::shared_ptr<ArmWorld> arm_world(const json& s, const std::string& path) {
  const std::string kind = field<std::string>(s, path, "kind", "");
  const std::string prompt = field<std::string>(s, path, "prompt", "");
  try {
    if (kind == "random_arm") return make_random_arm_world(arm_params(s, path));
    if (kind == "opener") return make_opener_world(field<std::vector<double>>(s, path, "cluster_probs", {}), prompt);
    if (kind == "categorical") {
      return make_categorical_world(field<std::vector<double>>(s, path, "cluster_probs", {}), prompt);
    }
    if (kind == "point_mass") return make_point_mass_world(field<std::size_t>(s, path, "length", 1));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path + "kind", e.what());
  }
  throw ConfigError(path + "kind", "unknown autoregressive world kind '" + kind + "'");
}

}  // namespace

std::optional<double> World::oracle_value(int mdm_steps) const {
  if (pair) return pair->exact_mutual_information();
  if (arm) return entropy_of(exact_cluster_probs(*arm));
  if (mdm) return entropy_of(exact_cluster_probs(*mdm, mdm_steps));
  return std::nullopt;
}

std::optional<double> World::control_mean(int) const {
  if (pair) {
    double h = 0.0;
    for (const auto& [s1, p1] : pair->first_world().distribution()) {
      const auto w2 = pair->second_world(std::span<const TokenId>(s1).first(s1.size() - 1));
      h += -p1 * std::log(p1) + p1 * sequence_entropy(w2->distribution());
    }
    return -h;
  }
  if (arm) return sequence_entropy(arm->distribution());
  return std::nullopt;
}

World build_world(const json& spec) {
  const std::string path = "world.";
  if (!spec.is_object()) throw ConfigError("world", "must be an object");
  const std::string kind = field<std::string>(spec, path, "kind", "");
  World w;
  if (kind == "random_mdm") {
    RandomMdmParams p;
    p.vocab = field<std::size_t>(spec, path, "vocab", p.vocab);
    p.length = field<std::size_t>(spec, path, "length", p.length);
    p.clusters = field<std::size_t>(spec, path, "clusters", p.clusters);
    p.seed = field<std::uint64_t>(spec, path, "seed", p.seed);
    p.logit_scale = field<double>(spec, path, "logit_scale", p.logit_scale);
    p.label_position = field<std::size_t>(spec, path, "label_position", p.label_position);
    const std::string order = field<std::string>(spec, path, "order", "left_to_right");
    if (order == "random") {
      p.order = ScheduleOrder::kRandom;
    } else if (order != "left_to_right") {
      throw ConfigError(path + "order", "must be left_to_right or random");
    }
    try {
      auto m = make_random_mdm_world(p);
      w.mdm = m;
      w.labeler = m;
    } catch (const Error& e) {
      throw ConfigError(path + "kind", e.what());
    }
    return w;
  }
  if (kind == "copy_pair" || kind == "independent_pair") {
    if (!spec.contains("first")) throw ConfigError(path + "first", "is required");
    auto first = arm_world(spec.at("first"), path + "first.");
    std::shared_ptr<PairWorld> pw;
    if (kind == "copy_pair") {
      pw = make_copy_pair_world(first);
    } else {
      if (!spec.contains("second")) throw ConfigError(path + "second", "is required");
      pw = make_independent_pair_world(first, arm_world(spec.at("second"), path + "second."));
    }
    w.pair = pw;
    w.labeler = pw;
    w.prompt = pw->prompt();
    return w;
  }
  auto a = arm_world(spec, path);
  w.arm = a;
  w.labeler = a;
  w.prompt = a->prompt();
  return w;
}

void RunConfig::validate() const {
  if (n == 0) throw ConfigError("n", "must be >= 1");
  if (workers == 0) throw ConfigError("workers", "must be >= 1");
  try {
    arm.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("sampler", e.what());
  }
  try {
    mdm.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("sampler", e.what());
  }
  try {
    cluster.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("cluster", e.what());
  }
  if (stopping) {
    try {
      stopping->validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError("estimator.stopping", e.what());
    }
  }
  if (seq_lambda.eta_seq < 0.0) throw ConfigError("estimator.eta_seq", "must be >= 0");
  if (seq_lambda.v_target < 0.0) throw ConfigError("estimator.v_target", "must be >= 0");
  if (!(scorer_noise >= 0.0 && scorer_noise < 0.5)) throw ConfigError("scorer.noise", "must be in [0, 0.5)");
  if (task == Task::kMi && paradigm == Paradigm::kMdm) throw ConfigError("task", "mi requires the arm paradigm");
  if (task == Task::kMi && cluster.mode != ClusterMode::kThreshold) {
    throw ConfigError("cluster.mode", "mi requires threshold clustering");
  }
  if (backend == Backend::kRemote) {
    if (paradigm == Paradigm::kMdm) throw ConfigError("paradigm", "the remote backend serves autoregressive models only");
    if (remote.logits_url.empty()) throw ConfigError("remote.logits_url", "is required for the remote backend");
    if (remote.nli_url.empty()) throw ConfigError("remote.nli_url", "is required for the remote backend");
    if (remote.top_k == 0) throw ConfigError("remote.top_k", "must be >= 1");
    if (prompts.empty()) throw ConfigError("prompts", "the remote backend needs at least one prompt");
  } else {
    if (world.is_null()) throw ConfigError("world", "is required for the synthetic backend");
    const std::string kind = world.value("kind", "");
    const bool is_pair = kind == "copy_pair" || kind == "independent_pair";
    if (task == Task::kMi && !is_pair) throw ConfigError("world.kind", "mi needs a pair world");
    if (task == Task::kSe && is_pair) throw ConfigError("world.kind", "se needs a single-answer world");
    if (paradigm == Paradigm::kMdm && kind != "random_mdm") throw ConfigError("world.kind", "mdm needs an mdm world");
    if (paradigm == Paradigm::kArm && kind == "random_mdm") throw ConfigError("world.kind", "arm needs an arm world");
  }
}

RunConfig parse_run_config(const json& doc, RunConfig c) {
  if (!doc.is_object()) throw ConfigError("config", "must be an object");
  const std::string schema = field<std::string>(doc, "", "schema", std::string(kConfigSchema));
  if (schema != kConfigSchema) throw ConfigError("schema", "expected " + std::string(kConfigSchema));

  const std::string paradigm = field<std::string>(doc, "", "paradigm", c.paradigm == Paradigm::kArm ? "arm" : "mdm");
  if (paradigm != "arm" && paradigm != "mdm") throw ConfigError("paradigm", "must be arm or mdm");
  c.paradigm = paradigm == "arm" ? Paradigm::kArm : Paradigm::kMdm;
  const std::string backend =
      field<std::string>(doc, "", "backend", c.backend == Backend::kSynthetic ? "synthetic" : "remote");
  if (backend != "synthetic" && backend != "remote") throw ConfigError("backend", "must be synthetic or remote");
  c.backend = backend == "synthetic" ? Backend::kSynthetic : Backend::kRemote;
  const std::string task = field<std::string>(doc, "", "task", c.task == Task::kSe ? "se" : "mi");
  if (task != "se" && task != "mi") throw ConfigError("task", "must be se or mi");
  const bool task_changed = (task == "mi") != (c.task == Task::kMi);
  c.task = task == "se" ? Task::kSe : Task::kMi;
  if (task_changed && c.task == Task::kMi) {
    c.n = 8;
    c.cluster.mode = ClusterMode::kThreshold;
  }
  c.n = field<std::size_t>(doc, "", "n", c.n);
  c.workers = field<std::size_t>(doc, "", "workers", c.workers);

  if (doc.contains("sampler")) {
    const json& s = doc.at("sampler");
    const std::string p = "sampler.";
    c.arm.lambda0 = c.mdm.lambda0 = field<double>(s, p, "lambda0", c.arm.lambda0);
    c.arm.eta_tok = c.mdm.eta_tok = field<double>(s, p, "eta_tok", c.arm.eta_tok);
    c.arm.e_target = c.mdm.e_target = field<double>(s, p, "e_target", c.arm.e_target);
    if (s.contains("top_k")) {
      if (s.at("top_k").is_string()) {
        if (s.at("top_k").get<std::string>() != "full") throw ConfigError("sampler.top_k", "must be an integer or full");
        c.arm.top_k = c.mdm.top_k = std::nullopt;
      } else {
        const auto k = field<long long>(s, p, "top_k", 0);
        if (k < 1) throw ConfigError("sampler.top_k", "must be >= 1");
        c.arm.top_k = c.mdm.top_k = static_cast<std::size_t>(k);
      }
    }
    c.arm.max_tokens = field<std::size_t>(s, p, "max_tokens", c.arm.max_tokens);
    try {
      if (s.contains("aggregation")) {
        c.arm.aggregation = c.mdm.aggregation = parse_aggregation(field<std::string>(s, p, "aggregation", "max"));
      }
      if (s.contains("marking")) c.arm.marking = parse_marking(field<std::string>(s, p, "marking", "trunc_suffix"));
    } catch (const ConfigError&) {
      throw;
    } catch (const InvalidArgument& e) {
      throw ConfigError("sampler", e.what());
    }
    if (s.contains("lambda_max")) {
      c.arm.lambda_max = c.mdm.lambda_max = field<double>(s, p, "lambda_max", 0.0);
    }
    c.mdm.steps = field<int>(s, p, "steps", c.mdm.steps);
  }
  if (doc.contains("cluster")) {
    const json& s = doc.at("cluster");
    const std::string p = "cluster.";
    if (s.contains("mode")) {
      const std::string mode = field<std::string>(s, p, "mode", "");
      if (mode == "binary") {
        c.cluster.mode = ClusterMode::kBinaryBidirectional;
      } else if (mode == "threshold") {
        c.cluster.mode = ClusterMode::kThreshold;
      } else {
        throw ConfigError("cluster.mode", "must be binary or threshold");
      }
    }
    c.cluster.tau = field<double>(s, p, "tau", c.cluster.tau);
    c.cluster.concat_prompt = field<bool>(s, p, "concat_prompt", c.cluster.concat_prompt);
    c.cluster.delimiter = field<std::string>(s, p, "delimiter", c.cluster.delimiter);
  }
  if (doc.contains("estimator")) {
    const json& s = doc.at("estimator");
    const std::string p = "estimator.";
    if (s.contains("cv_mode")) {
      try {
        c.cv_mode = parse_cv_mode(field<std::string>(s, p, "cv_mode", ""));
      } catch (const ConfigError&) {
        throw;
      } catch (const InvalidArgument& e) {
        throw ConfigError("estimator.cv_mode", e.what());
      }
    }
    c.seq_lambda.eta_seq = field<double>(s, p, "eta_seq", c.seq_lambda.eta_seq);
    c.seq_lambda.v_target = field<double>(s, p, "v_target", c.seq_lambda.v_target);
    if (s.contains("stopping")) {
      if (s.at("stopping").is_null()) {
        c.stopping.reset();
      } else {
        const json& st = s.at("stopping");
        StoppingConfig sc = c.stopping.value_or(StoppingConfig{});
        sc.window = field<std::size_t>(st, p + "stopping.", "window", sc.window);
        sc.epsilon = field<double>(st, p + "stopping.", "epsilon", sc.epsilon);
        sc.min_ess_ratio = field<double>(st, p + "stopping.", "min_ess_ratio", sc.min_ess_ratio);
        c.stopping = sc;
      }
    }
  }
  if (doc.contains("scorer")) c.scorer_noise = field<double>(doc.at("scorer"), "scorer.", "noise", c.scorer_noise);
  if (doc.contains("world")) c.world = doc.at("world");
  if (doc.contains("remote")) {
    const json& s = doc.at("remote");
    const std::string p = "remote.";
    c.remote.logits_url = field<std::string>(s, p, "logits_url", c.remote.logits_url);
    c.remote.nli_url = field<std::string>(s, p, "nli_url", c.remote.nli_url);
    c.remote.top_k = field<std::size_t>(s, p, "top_k", c.remote.top_k);
    c.remote.eos_id = field<TokenId>(s, p, "eos_id", c.remote.eos_id);
    c.remote.http.timeout =
        std::chrono::milliseconds(field<long long>(s, p, "timeout_ms", c.remote.http.timeout.count()));
    c.remote.http.max_retries = field<int>(s, p, "max_retries", c.remote.http.max_retries);
    c.remote.http.backoff = std::chrono::milliseconds(field<long long>(s, p, "backoff_ms", c.remote.http.backoff.count()));
  }
  if (doc.contains("templates")) {
    const json& s = doc.at("templates");
    c.se_template = field<std::string>(s, "templates.", "se", c.se_template);
    c.mi_template = field<std::string>(s, "templates.", "mi_second", c.mi_template);
  }
  if (doc.contains("prompts")) {
    c.prompts.clear();
    std::size_t i = 0;
    for (const auto& p : doc.at("prompts")) {
      const std::string path = "prompts[" + std::to_string(i++) + "].";
      PromptSpec ps;
      ps.id = field<std::string>(p, path, "prompt_id", "");
      if (ps.id.empty()) throw ConfigError(path + "prompt_id", "is required");
      ps.context = field<std::string>(p, path, "context", "");
      ps.question = field<std::string>(p, path, "question", "");
      c.prompts.push_back(std::move(ps));
    }
  }
  return c;
}

std::vector<PromptSpec> read_prompts(const std::string& path) {
  std::vector<PromptSpec> out;
  for (const auto& r : read_jsonl(path)) {
    PromptSpec p;
    try {
      p.id = r.value.at("prompt_id").get<std::string>();
      p.context = r.value.value("context", "");
      p.question = r.value.at("question").get<std::string>();
    } catch (const json::exception& e) {
      throw CorruptTrace(path, r.offset, e.what());
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::string render_prompt(const std::string& tmpl, const PromptSpec& prompt) {
  std::string out = fill_template(tmpl, {{"context", prompt.context}, {"question", prompt.question}});
  const auto b = out.find_first_not_of(" \t\n");
  if (b == std::string::npos) return {};
  const auto e = out.find_last_not_of(" \t\n");
  return out.substr(b, e - b + 1);
}

}  // namespace semsteer
