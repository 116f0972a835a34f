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

#ifndef SEMSTEER_SAMPLER_MDM_HPP
#define SEMSTEER_SAMPLER_MDM_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "semsteer/domain.hpp"
#include "semsteer/models.hpp"
#include "semsteer/sampler_arm.hpp"
#include "semsteer/similarity.hpp"

namespace semsteer {

struct MdmSamplerConfig {
  double lambda0 = 0.0;
  double eta_tok = 0.0;
  double e_target = 0.3;
  std::optional<std::size_t> top_k;
  Aggregation aggregation = Aggregation::kMax;
  std::uint64_t seed = 0;
  std::optional<double> lambda_max;
  int steps = 1;  // total denoising steps T

  void validate() const;
};

/// Decoded state with `candidate` placed at a masked `position`; the other
/// masks stay inline.
std::string build_intermediate(const MdmModel& model, std::span<const TokenId> state, std::size_t position,
                               TokenId candidate);

/// Diversity-steered masked-diffusion sampler with pathwise accounting: each
/// fill records its untilted and tilted log-probabilities.
class MdmSampler {
 public:
  MdmSampler(const MdmModel& model, MdmSamplerConfig config);

  SequenceSample sample_sequence(SteeringPool& pool, Rng& rng, double lambda_start) const;
  SequenceSample sample_sequence(SteeringPool& pool, Rng& rng) const {
    return sample_sequence(pool, rng, config_.lambda0);
  }
  SampleSet sample_set(SteeringPool& pool, std::size_t n, Rng& rng) const;

  const MdmSamplerConfig& config() const noexcept { return config_; }

 private:
  const MdmModel& model_;
  MdmSamplerConfig config_;
};

}  // namespace semsteer

#endif  // SEMSTEER_SAMPLER_MDM_HPP
