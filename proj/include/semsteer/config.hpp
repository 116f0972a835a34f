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

#ifndef SEMSTEER_CONFIG_HPP
#define SEMSTEER_CONFIG_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "semsteer/clustering.hpp"
#include "semsteer/estimators.hpp"
#include "semsteer/remote.hpp"
#include "semsteer/sampler_arm.hpp"
#include "semsteer/sampler_mdm.hpp"
#include "semsteer/worlds.hpp"

namespace semsteer {

/// Invalid configuration; the message starts with the offending field.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(const std::string& field, const std::string& what) : InvalidArgument(field + ": " + what) {}
};

enum class Paradigm { kArm, kMdm };
enum class Backend { kSynthetic, kRemote };
enum class Task { kSe, kMi };

inline constexpr const char* kDefaultSeTemplate = "{context} Answer in one sentence. Q: {question} A:";
inline constexpr const char* kDefaultMiTemplate =
    "{context} Consider the following question. Q: {question}\nOne answer to the question Q is {first_answer}\n"
    "Answer in one sentence. Q: {question} A:";

/// Synthetic world built from a config block.
struct World {
  std::shared_ptr<const ArmWorld> arm;
  std::shared_ptr<const MdmWorld> mdm;
  std::shared_ptr<const PairWorld> pair;
  std::shared_ptr<const TextLabeler> labeler;
  std::string prompt;

  /// Exact SE (or MI for pair worlds) when the world is enumerable.
  std::optional<double> oracle_value(int mdm_steps) const;
  /// E_p[−log p(s)] (SE) or E_p[log p(s1, s2)] (MI).
  std::optional<double> control_mean(int mdm_steps) const;
};

/// Kinds: random_arm, random_mdm, opener, categorical, point_mass,
/// copy_pair, independent_pair.
World build_world(const nlohmann::json& spec);

struct PromptSpec {
  std::string id;
  std::string context;
  std::string question;
};

struct RemoteSettings {
  std::string logits_url;
  std::string nli_url;
  std::size_t top_k = 20;
  TokenId eos_id = 0;
  HttpConfig http;
};

struct RunConfig {
  Paradigm paradigm = Paradigm::kArm;
  Backend backend = Backend::kSynthetic;
  Task task = Task::kSe;
  std::size_t n = 16;
  ArmSamplerConfig arm;
  MdmSamplerConfig mdm;
  ClusterConfig cluster;
  std::optional<StoppingConfig> stopping;
  SeqLambdaConfig seq_lambda;
  CvMode cv_mode = CvMode::kPathwiseEntropy;
  double scorer_noise = 0.0;
  nlohmann::json world;
  RemoteSettings remote;
  std::string se_template = kDefaultSeTemplate;
  std::string mi_template = kDefaultMiTemplate;
  std::vector<PromptSpec> prompts;
  std::size_t workers = 1;

  void validate() const;
};

/// Reads a config document. Fields absent from the document keep the values
/// already present in `base`.
RunConfig parse_run_config(const nlohmann::json& doc, RunConfig base = {});

/// Reads prompt records {prompt_id, context?, question}.
std::vector<PromptSpec> read_prompts(const std::string& path);

/// Prompt text from a template and a prompt record.
std::string render_prompt(const std::string& tmpl, const PromptSpec& prompt);

}  // namespace semsteer

#endif  // SEMSTEER_CONFIG_HPP
