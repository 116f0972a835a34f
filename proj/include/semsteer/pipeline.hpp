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

#ifndef SEMSTEER_PIPELINE_HPP
#define SEMSTEER_PIPELINE_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "semsteer/clustering.hpp"
#include "semsteer/domain.hpp"
#include "semsteer/estimators.hpp"
#include "semsteer/sampler_arm.hpp"
#include "semsteer/sampler_mdm.hpp"
#include "semsteer/similarity.hpp"
#include "semsteer/worlds.hpp"

namespace semsteer {

/// Draws one sequence against the pool, starting the tilt at `lambda_start`.
using SequenceDraw = std::function<SequenceSample(SteeringPool& pool, Rng& rng, double lambda_start)>;

struct SeRunConfig {
  std::string prompt_id;
  std::string prompt;
  std::size_t n = 16;
  double lambda0 = 0.0;
  Aggregation aggregation = Aggregation::kMax;
  ClusterConfig cluster;
  std::optional<StoppingConfig> stopping;
  SeqLambdaConfig seq_lambda;
  std::size_t seq_lambda_window = 4;
  CvMode cv_mode = CvMode::kPathwiseEntropy;
  std::optional<double> known_mean;
};

struct SeRun {
  SampleSet samples;
  Clustering clustering;
  std::vector<double> lambda_starts;
  EstimateReport report;
};

/// Samples sequentially into a fresh pool, clustering each new answer against
/// the existing representatives, and estimates semantic entropy.
SeRun run_se(const SequenceDraw& draw, const SimilarityScorer& scorer, const SeRunConfig& cfg, Rng& rng);
SeRun run_se(const ArmSampler& sampler, const SimilarityScorer& scorer, const SeRunConfig& cfg, Rng& rng);
SeRun run_se(const MdmSampler& sampler, const SimilarityScorer& scorer, const SeRunConfig& cfg, Rng& rng);

/// Clusters and estimates already drawn samples in their generation order.
SeRun estimate_se(std::vector<SequenceSample> samples, const SimilarityScorer& scorer, const SeRunConfig& cfg);

struct MiRunConfig {
  std::string prompt_id;
  std::string prompt;
  std::size_t n = 8;
  ClusterConfig cluster{ClusterMode::kThreshold, 0.5, true, "||"};
  std::optional<StoppingConfig> stopping;
  CvMode cv_mode = CvMode::kPathwiseEntropy;
  std::optional<double> known_mean;
};

struct MiRun {
  PairSet pairs;
  Clustering joint;
  Clustering first;
  Clustering second;
  std::vector<int> first_map;
  std::vector<int> second_map;
  EstimateReport report;
};

/// ArmModel whose decoded text is "<first answer> <delimiter> <own text>", so
/// second-answer candidates are compared with whole pairs.
class JointTextModel final : public ArmModel {
 public:
  JointTextModel(const ArmModel& inner, std::string first_answer, std::string delimiter);
  SparseLogits next_token_logits(std::span<const TokenId> prefix) const override {
    return inner_.next_token_logits(prefix);
  }
  TokenId eos_id() const override { return inner_.eos_id(); }
  std::string decode(std::span<const TokenId> tokens) const override;

 private:
  const ArmModel& inner_;
  std::string head_;
};

/// Iteratively prompted pairs: first answers are steered against earlier
/// first answers, second answers against earlier whole pairs.
MiRun run_mi(const ArmChain& chain, const ArmSamplerConfig& sampler, const SimilarityScorer& scorer,
             const MiRunConfig& cfg, Rng& rng);

MiRun estimate_mi(std::vector<SamplePair> pairs, const SimilarityScorer& scorer, const MiRunConfig& cfg);

}  // namespace semsteer

#endif  // SEMSTEER_PIPELINE_HPP
