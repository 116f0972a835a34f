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

#include "semsteer/sampler_mdm.hpp"

#include <algorithm>
#include <limits>

#include "semsteer/error.hpp"

namespace semsteer {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void MdmSamplerConfig::validate() const {
  if (!(lambda0 >= 0.0)) throw InvalidArgument("lambda0 must be >= 0");
  if (!(eta_tok >= 0.0)) throw InvalidArgument("eta_tok must be >= 0");
  if (!(e_target >= 0.0 && e_target <= 1.0)) throw InvalidArgument("e_target must be in [0, 1]");
  if (top_k && *top_k == 0) throw InvalidArgument("top_k must be >= 1");
  if (steps < 1) throw InvalidArgument("steps must be >= 1");
  if (lambda_max && *lambda_max < lambda0) throw InvalidArgument("lambda_max must be >= lambda0");
}

std::string build_intermediate(const MdmModel& model, std::span<const TokenId> state, std::size_t position,
                               TokenId candidate) {
  if (position >= state.size() || state[position] != model.mask_id()) {
    throw InvalidArgument("position " + std::to_string(position) + " is not masked");
  }
  std::vector<TokenId> filled(state.begin(), state.end());
  filled[position] = candidate;
  return model.decode(filled);
}

MdmSampler::MdmSampler(const MdmModel& model, MdmSamplerConfig config) : model_(model), config_(std::move(config)) {
  config_.validate();
}

SequenceSample MdmSampler::sample_sequence(SteeringPool& pool, Rng& rng, double lambda_start) const {
  SequenceSample out;
  out.origin = Origin::kMdm;
  const TokenId mask = model_.mask_id();
  std::vector<TokenId> state(model_.length(), mask);
  double lambda = lambda_start;

  const auto score = [&](const std::vector<std::string>& texts) {
    if (pool.size() == 0) return std::vector<double>(texts.size(), 0.0);
    return pool.penalties(texts);
  };

  try {
    for (int t = config_.steps - 1; t >= 0; --t) {
      const auto positions = model_.schedule(state, t + 1, rng);
      // Every fill in this step conditions on the pre-step state.
      const std::vector<TokenId> before = state;
      for (const std::size_t m : positions) {
        const BaseDistribution base = to_base_distribution(model_.denoise_logits(before, m));
        const auto support = top_k_indices(base.logp, config_.top_k);
        const bool full_support = std::count_if(base.logp.begin(), base.logp.end(),
                                                [](double v) { return v != kNegInf; }) ==
                                  static_cast<std::ptrdiff_t>(support.size());
        std::vector<double> support_logp(support.size());
        for (std::size_t i = 0; i < support.size(); ++i) support_logp[i] = base.logp[support[i]];

        std::vector<double> pen(support.size(), 0.0);
        bool scored = false;
        if (lambda > 0.0 && pool.size() > 0) {
          std::vector<std::string> texts;
          texts.reserve(support.size());
          for (const std::size_t i : support) texts.push_back(build_intermediate(model_, before, m, base.ids[i]));
          pen = score(texts);
          scored = true;
        }
        const std::vector<double> logq =
            (lambda == 0.0 && full_support) ? support_logp : tilt_logits(support_logp, pen, lambda);
        const std::size_t pick = sample_categorical(logq, rng);
        const TokenId token = base.ids[support[pick]];
        const double realized =
            scored ? pen[pick] : score({build_intermediate(model_, before, m, token)}).front();

        TokenStep step;
        step.token = token;
        step.logp_base = support_logp[pick];
        step.logq_proposal = logq[pick];
        step.penalty = realized;
        step.lambda = lambda;
        step.base_entropy = base.entropy;
        step.denoise_step = t;
        step.position = static_cast<int>(m);
        out.steps.push_back(step);
        state[m] = token;

        lambda = update_lambda_token(lambda, realized, config_.eta_tok, config_.e_target);
        if (config_.lambda_max) lambda = std::min(lambda, *config_.lambda_max);
      }
    }
    if (std::find(state.begin(), state.end(), mask) != state.end()) {
      throw Error("schedule left masked positions after the final step");
    }
  } catch (const Error& e) {
    out.sequence.tokens = state;
    finalize_sample(out);
    throw SamplingAborted(e.what(), std::move(out));
  }
  out.sequence.tokens = std::move(state);
  out.sequence.text = model_.decode(out.sequence.tokens);
  finalize_sample(out);
  return out;
}

SampleSet MdmSampler::sample_set(SteeringPool& pool, std::size_t n, Rng& rng) const {
  if (n == 0) throw InvalidArgument("sample_set needs N >= 1");
  std::vector<SequenceSample> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    samples.push_back(sample_sequence(pool, rng));
    pool.add(samples.back().sequence.text);
  }
  return SampleSet(std::move(samples));
}

}  // namespace semsteer
