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

#include "semsteer/sampler_arm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace semsteer {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void ArmSamplerConfig::validate() const {
  if (!(lambda0 >= 0.0)) throw InvalidArgument("lambda0 must be >= 0");
  if (!(eta_tok >= 0.0)) throw InvalidArgument("eta_tok must be >= 0");
  if (!(e_target >= 0.0 && e_target <= 1.0)) throw InvalidArgument("e_target must be in [0, 1]");
  if (top_k && *top_k == 0) throw InvalidArgument("top_k must be >= 1");
  if (max_tokens == 0) throw InvalidArgument("max_tokens must be >= 1");
  if (lambda_max && *lambda_max < lambda0) throw InvalidArgument("lambda_max must be >= lambda0");
}

std::vector<double> tilt_logits(std::span<const double> base_logits, std::span<const double> penalties,
                                double lambda) {
  if (base_logits.size() != penalties.size()) throw InvalidArgument("penalties do not match the logit support");
  if (lambda == 0.0) return log_softmax(base_logits);
  std::vector<double> tilted(base_logits.size());
  for (std::size_t i = 0; i < tilted.size(); ++i) tilted[i] = base_logits[i] - lambda * penalties[i];
  return log_softmax(tilted);
}

double update_lambda_token(double lambda, double max_similarity, double eta_tok, double e_target) {
  return std::max(0.0, lambda + eta_tok * (max_similarity - e_target));
}

std::size_t sample_categorical(std::span<const double> logprobs, Rng& rng) {
  if (logprobs.empty()) throw InvalidArgument("cannot sample from an empty support");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double cum = 0.0;
  std::size_t last = logprobs.size();
  for (std::size_t i = 0; i < logprobs.size(); ++i) {
    if (logprobs[i] == kNegInf) continue;
    cum += std::exp(logprobs[i]);
    last = i;
    if (u < cum) return i;
  }
  if (last == logprobs.size()) throw InvalidArgument("no finite log-probability to sample");
  return last;
}

std::vector<std::size_t> top_k_indices(std::span<const double> values, std::optional<std::size_t> k) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] != kNegInf) idx.push_back(i);
  }
  if (k && *k < idx.size()) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    idx.resize(*k);
    std::sort(idx.begin(), idx.end());
  }
  return idx;
}

ArmSampler::ArmSampler(const ArmModel& model, ArmSamplerConfig config) : model_(model), config_(std::move(config)) {
  config_.validate();
}

SequenceSample ArmSampler::sample_sequence(SteeringPool& pool, Rng& rng, double lambda_start) const {
  SequenceSample out;
  out.origin = Origin::kArm;
  std::vector<TokenId> prefix;
  double lambda = lambda_start;
  const TokenId eos = model_.eos_id();

  const auto candidate_text = [&](TokenId next) {
    if (next == eos) return model_.decode(prefix);
    prefix.push_back(next);
    std::string text = mark_partial(model_.decode(prefix), config_.marking, false);
    prefix.pop_back();
    return text;
  };
  const auto score = [&](const std::vector<std::string>& texts) {
    std::vector<double> pen(texts.size(), 0.0);
    if (pool.size() == 0) return pen;
    std::vector<std::string> scorable;
    std::vector<std::size_t> where;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (texts[i].empty()) continue;
      scorable.push_back(texts[i]);
      where.push_back(i);
    }
    const auto got = pool.penalties(scorable);
    for (std::size_t i = 0; i < got.size(); ++i) pen[where[i]] = got[i];
    return pen;
  };

  try {
    while (true) {
      if (prefix.size() >= config_.max_tokens) {
        out.truncated = true;
        break;
      }
      const BaseDistribution base = to_base_distribution(model_.next_token_logits(prefix));
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
        for (const std::size_t i : support) texts.push_back(candidate_text(base.ids[i]));
        pen = score(texts);
        scored = true;
      }
      // With no tilt over the full support the proposal is the base
      // conditional itself, bit for bit.
      const std::vector<double> logq =
          (lambda == 0.0 && full_support) ? support_logp : tilt_logits(support_logp, pen, lambda);
      const std::size_t pick = sample_categorical(logq, rng);
      const TokenId token = base.ids[support[pick]];
      const double realized = scored ? pen[pick] : score({candidate_text(token)}).front();

      TokenStep step;
      step.token = token;
      step.logp_base = support_logp[pick];
      step.logq_proposal = logq[pick];
      step.penalty = realized;
      step.lambda = lambda;
      step.base_entropy = base.entropy;
      out.steps.push_back(step);
      prefix.push_back(token);

      lambda = update_lambda_token(lambda, realized, config_.eta_tok, config_.e_target);
      if (config_.lambda_max) lambda = std::min(lambda, *config_.lambda_max);
      if (token == eos) break;
    }
  } catch (const Error& e) {
    out.sequence.tokens = prefix;
    finalize_sample(out);
    throw SamplingAborted(e.what(), std::move(out));
  }
  out.sequence.tokens = std::move(prefix);
  out.sequence.text = model_.decode(out.sequence.tokens);
  finalize_sample(out);
  return out;
}

SampleSet ArmSampler::sample_set(SteeringPool& pool, std::size_t n, Rng& rng) const {
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
