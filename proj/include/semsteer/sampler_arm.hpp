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

#ifndef SEMSTEER_SAMPLER_ARM_HPP
#define SEMSTEER_SAMPLER_ARM_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "semsteer/domain.hpp"
#include "semsteer/error.hpp"
#include "semsteer/models.hpp"
#include "semsteer/similarity.hpp"

namespace semsteer {

struct ArmSamplerConfig {
  double lambda0 = 0.0;
  double eta_tok = 0.0;
  double e_target = 0.3;
  std::optional<std::size_t> top_k;  // nullopt samples over the full support
  std::size_t max_tokens = 64;
  Aggregation aggregation = Aggregation::kMax;
  std::uint64_t seed = 0;
  std::optional<double> lambda_max;  // no upper clamp by default
  PartialMarking marking = PartialMarking::kTruncSuffix;

  void validate() const;
};

/// ℓ − λ·π followed by log-softmax over the support.
std::vector<double> tilt_logits(std::span<const double> base_logits, std::span<const double> penalties,
                                double lambda);

/// max(0, λ + η(maxE − E_target)).
double update_lambda_token(double lambda, double max_similarity, double eta_tok, double e_target);

/// Inverse-CDF draw from normalized log-probabilities using one uniform.
std::size_t sample_categorical(std::span<const double> logprobs, Rng& rng);

/// Indices of the k largest entries, ties broken towards the lower index;
/// -inf entries are never selected.
std::vector<std::size_t> top_k_indices(std::span<const double> values, std::optional<std::size_t> k);

/// Diversity-steered autoregressive sampler. The penalty pool holds the
/// answers generated so far for the current prompt.
class ArmSampler {
 public:
  ArmSampler(const ArmModel& model, ArmSamplerConfig config);

  /// One steered sequence starting from `lambda_start`. Penalties are only
  /// requested from the pool when they can change the proposal or drive the
  /// λ update.
  SequenceSample sample_sequence(SteeringPool& pool, Rng& rng, double lambda_start) const;
  SequenceSample sample_sequence(SteeringPool& pool, Rng& rng) const {
    return sample_sequence(pool, rng, config_.lambda0);
  }

  /// N sequences grown sequentially into `pool`.
  SampleSet sample_set(SteeringPool& pool, std::size_t n, Rng& rng) const;

  const ArmSamplerConfig& config() const noexcept { return config_; }

 private:
  const ArmModel& model_;
  ArmSamplerConfig config_;
};

/// Raised when a model or scorer fails mid-sequence; keeps the partial trace.
class SamplingAborted : public Error {
 public:
  SamplingAborted(const std::string& what, SequenceSample partial) : Error(what), partial_(std::move(partial)) {}
  const SequenceSample& partial() const noexcept { return partial_; }

 private:
  SequenceSample partial_;
};

}  // namespace semsteer

#endif  // SEMSTEER_SAMPLER_ARM_HPP
