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

#ifndef SEMSTEER_DOMAIN_HPP
#define SEMSTEER_DOMAIN_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace semsteer {

using TokenId = std::int32_t;
using Rng = std::mt19937_64;

inline constexpr std::string_view kTruncMarker = "[TRUNC]";
inline constexpr std::string_view kMaskMarker = "[MASK]";

/// Reserved token ids of one vocabulary.
struct ReservedTokens {
  TokenId bos = 0;
  TokenId eos = 1;
  TokenId mask = 2;
  TokenId trunc = 3;
};

/// Token table with its own reserved markers. Pieces are joined with
/// `joiner` on decode; synthetic vocabularies use a single space.
class Vocab {
 public:
  Vocab() = default;
  /// Builds a vocabulary whose ids 0..3 are BOS/EOS/MASK/TRUNC followed by
  /// `content` in order.
  static Vocab with_content(const std::vector<std::string>& content, std::string joiner = " ");

  std::size_t size() const noexcept { return pieces_.size(); }
  const ReservedTokens& reserved() const noexcept { return reserved_; }
  const std::string& piece(TokenId id) const;
  bool contains(TokenId id) const noexcept { return id >= 0 && static_cast<std::size_t>(id) < pieces_.size(); }
  bool is_reserved(TokenId id) const noexcept;
  std::optional<TokenId> find(std::string_view piece) const;

  /// Content ids (everything that is not a reserved marker), ascending.
  std::vector<TokenId> content_ids() const;

  /// Decodes tokens, skipping BOS/EOS; MASK and TRUNC render as their markers.
  std::string decode(std::span<const TokenId> tokens) const;
  /// Splits on whitespace and maps every piece back to its id.
  std::vector<TokenId> encode(std::string_view text) const;

 private:
  std::vector<std::string> pieces_;
  std::unordered_map<std::string, TokenId> index_;
  ReservedTokens reserved_;
  std::string joiner_ = " ";
};

struct Sequence {
  std::vector<TokenId> tokens;
  std::string text;
};

/// One realized token (or one MDM fill) with its probability accounting.
struct TokenStep {
  TokenId token = 0;
  double logp_base = 0.0;      // log p over the full vocabulary
  double logq_proposal = 0.0;  // log q over the sampling support
  double penalty = 0.0;        // aggregated similarity of the realized candidate
  double lambda = 0.0;         // tilt strength used at this step
  double base_entropy = 0.0;   // entropy of the untilted conditional; NaN if unknown
  int denoise_step = -1;       // MDM only
  int position = -1;           // MDM only
};

enum class Origin { kArm, kMdm };

struct SequenceSample {
  Sequence sequence;
  std::vector<TokenStep> steps;
  double logp = 0.0;
  double logq = 0.0;
  Origin origin = Origin::kArm;
  bool truncated = false;

  double log_weight() const noexcept { return logp - logq; }
  /// Σ base entropy over steps; NaN if any step lacks it.
  double entropy_compensator() const noexcept;
};

/// Rebuilds logp/logq from the recorded steps.
void finalize_sample(SequenceSample& sample);

/// Answer pair from iterative prompting.
struct SamplePair {
  SequenceSample first;
  SequenceSample second;
  double logp_joint = 0.0;
  double logq_joint = 0.0;

  static SamplePair make(SequenceSample first, SequenceSample second);
  double log_weight() const noexcept { return logp_joint - logq_joint; }
};

/// Log-space log Σ exp; returns -inf for an all -inf input.
double log_sum_exp(std::span<const double> values);

/// Normalized log-probabilities; -inf entries stay -inf.
std::vector<double> log_softmax(std::span<const double> logits);

/// Shannon entropy (nats) of the distribution given by normalized log-probs.
double entropy_from_logprobs(std::span<const double> logprobs);

/// Self-normalized weights from per-sample log p − log q.
std::vector<double> normalize_weights(std::span<const double> log_ratios);

/// Kong's ESS, 1 / Σ w̃².
double effective_sample_size(std::span<const double> normalized_weights);

/// Ordered samples with their importance weights.
template <class Sample>
class WeightedSet {
 public:
  WeightedSet() = default;
  explicit WeightedSet(std::vector<Sample> samples) : samples_(std::move(samples)) { reweight(); }

  void push_back(Sample sample) {
    samples_.push_back(std::move(sample));
    reweight();
  }

  const std::vector<Sample>& samples() const noexcept { return samples_; }
  const std::vector<double>& log_weights() const noexcept { return log_weights_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<double>& normalized_weights() const noexcept { return normalized_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  double ess() const { return effective_sample_size(normalized_); }

 private:
  void reweight();

  std::vector<Sample> samples_;
  std::vector<double> log_weights_;
  std::vector<double> weights_;
  std::vector<double> normalized_;
};

using SampleSet = WeightedSet<SequenceSample>;
using PairSet = WeightedSet<SamplePair>;

/// Per-prompt output of the estimators.
struct EstimateReport {
  std::string prompt_id;
  std::string task = "se";  // "se" or "mi"
  std::size_t n = 0;
  double se = 0.0;
  double se_cv = 0.0;
  double mi = 0.0;
  double mi_cv = 0.0;
  double alpha_se = 0.0;
  double alpha_mi = 0.0;
  double ess = 0.0;
  std::size_t n_clusters = 0;
  bool stopped_early = false;
  std::vector<double> history;
  std::vector<int> assignment;
  std::vector<std::size_t> representatives;
  std::vector<std::size_t> cluster_sizes;
  std::string cv_mode;
  std::string best_answer;
  std::optional<double> oracle_value;
};

}  // namespace semsteer

#endif  // SEMSTEER_DOMAIN_HPP
