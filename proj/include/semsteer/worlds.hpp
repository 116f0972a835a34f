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

#ifndef SEMSTEER_WORLDS_HPP
#define SEMSTEER_WORLDS_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "semsteer/domain.hpp"
#include "semsteer/models.hpp"

namespace semsteer {

/// Bit c is set when cluster c is reachable.
using LabelMask = std::uint64_t;

inline constexpr double kEnumerationLimit = 1e6;

/// Ground-truth semantic labels for (possibly partial) texts.
class TextLabeler {
 public:
  virtual ~TextLabeler() = default;
  /// Clusters of every reachable completion consistent with `text`; a single
  /// bit means the text is semantically determined. Throws ScoringError for
  /// text that cannot be labeled.
  virtual LabelMask consistent_labels(std::string_view text) const = 0;
  virtual std::size_t n_clusters() const = 0;
};

/// Strips a leading "<prompt> " from text when present.
std::string_view strip_prompt(std::string_view text, std::string_view prompt);

/// Logits over `ArmWorld::support()` for a prefix (EOS first, then content).
using ArmConditional = std::function<std::vector<double>(std::span<const TokenId> prefix)>;
/// Cluster of a complete sequence (EOS stripped).
using SequenceLabel = std::function<int(std::span<const TokenId> tokens)>;

/// Exactly enumerable autoregressive world. Sequences hold 1..max_length
/// content tokens followed by EOS; the model is forced to emit EOS at
/// max_length.
class ArmWorld final : public ArmModel, public TextLabeler {
 public:
  ArmWorld(Vocab vocab, std::size_t max_length, ArmConditional conditional, SequenceLabel label,
           std::size_t n_clusters, std::string prompt = {});

  SparseLogits next_token_logits(std::span<const TokenId> prefix) const override;
  TokenId eos_id() const override { return vocab_.reserved().eos; }
  std::string decode(std::span<const TokenId> tokens) const override { return vocab_.decode(tokens); }

  LabelMask consistent_labels(std::string_view text) const override;
  std::size_t n_clusters() const override { return n_clusters_; }

  const Vocab& vocab() const noexcept { return vocab_; }
  std::size_t max_length() const noexcept { return max_length_; }
  const std::string& prompt() const noexcept { return prompt_; }
  /// EOS followed by the content ids.
  const std::vector<TokenId>& support() const noexcept { return support_; }
  /// Label of a complete sequence; EOS, if present, is ignored.
  int label(std::span<const TokenId> tokens) const;

  /// Complete sequences (EOS-terminated) with positive probability.
  const std::map<std::vector<TokenId>, double>& distribution() const noexcept { return distribution_; }

 private:
  void build();

  Vocab vocab_;
  std::size_t max_length_;
  ArmConditional conditional_;
  SequenceLabel label_;
  std::size_t n_clusters_;
  std::string prompt_;
  std::vector<TokenId> support_;
  std::map<std::vector<TokenId>, std::vector<double>> table_;
  std::map<std::vector<TokenId>, double> distribution_;
  std::map<std::vector<TokenId>, LabelMask> prefix_labels_;
  std::map<std::vector<TokenId>, int> complete_labels_;
};

/// Logits over the content ids for one masked position given the state.
using MdmConditional = std::function<std::vector<double>(std::span<const TokenId> state, std::size_t position)>;

/// Exactly enumerable masked-diffusion world of fixed length.
class MdmWorld final : public MdmModel, public TextLabeler {
 public:
  MdmWorld(Vocab vocab, std::size_t length, MdmConditional conditional, SequenceLabel label, std::size_t n_clusters,
           ScheduleOrder order = ScheduleOrder::kLeftToRight, std::string prompt = {});

  std::size_t length() const override { return length_; }
  TokenId mask_id() const override { return vocab_.reserved().mask; }
  SparseLogits denoise_logits(std::span<const TokenId> state, std::size_t position) const override;
  std::vector<std::size_t> schedule(std::span<const TokenId> state, int steps_remaining, Rng& rng) const override;
  std::string decode(std::span<const TokenId> tokens) const override { return vocab_.decode(tokens); }

  LabelMask consistent_labels(std::string_view text) const override;
  std::size_t n_clusters() const override { return n_clusters_; }

  const Vocab& vocab() const noexcept { return vocab_; }
  ScheduleOrder order() const noexcept { return order_; }
  const std::string& prompt() const noexcept { return prompt_; }
  int label(std::span<const TokenId> tokens) const { return label_(tokens); }

  /// Final-sequence marginal of the denoising process run for `steps` steps,
  /// summed over every schedule realization.
  std::map<std::vector<TokenId>, double> trajectory_marginal(int steps) const;

 private:
  Vocab vocab_;
  std::size_t length_;
  MdmConditional conditional_;
  SequenceLabel label_;
  std::size_t n_clusters_;
  ScheduleOrder order_;
  std::string prompt_;
  std::vector<TokenId> content_;
  // Labels are computed against the marginal for `length_` steps, which has
  // the same support as every other step count.
  std::map<std::vector<TokenId>, double> support_marginal_;
};

/// Iteratively prompted answer pair: the second answer is conditioned on the
/// first. Synthetic implementations are enumerable.
class ArmChain {
 public:
  virtual ~ArmChain() = default;
  virtual const ArmModel& first() const = 0;
  virtual std::shared_ptr<const ArmModel> second(const Sequence& first_answer) const = 0;
};

/// Enumerable pair world; the second-answer world is chosen by the first
/// answer. Joint labels are first_label * K2 + second_label. Texts are
/// "a1 || a2" for pairs, "a1" for a first answer and "|| a2" for a second
/// answer on its own.
class PairWorld final : public ArmChain, public TextLabeler {
 public:
  using SecondFactory = std::function<std::shared_ptr<const ArmWorld>(std::span<const TokenId> first)>;

  PairWorld(std::shared_ptr<const ArmWorld> first, SecondFactory second, std::string delimiter = "||",
            std::string prompt = {});

  const ArmModel& first() const override { return *first_; }
  std::shared_ptr<const ArmModel> second(const Sequence& first_answer) const override;

  LabelMask consistent_labels(std::string_view text) const override;
  std::size_t n_clusters() const override { return k1_ * k2_; }

  const ArmWorld& first_world() const noexcept { return *first_; }
  std::shared_ptr<const ArmWorld> second_world(std::span<const TokenId> first_tokens) const;
  const std::string& delimiter() const noexcept { return delimiter_; }
  const std::string& prompt() const noexcept { return prompt_; }

  /// Labels of a second answer seen without its first answer: the union over
  /// every second-answer world in which it is reachable.
  LabelMask second_labels(std::string_view answer) const;

  /// p(joint cluster) by enumeration.
  std::vector<double> exact_joint_cluster_probs() const;
  /// Mutual information (nats) between first and second answer clusters.
  double exact_mutual_information() const;

 private:
  std::shared_ptr<const ArmWorld> first_;
  SecondFactory factory_;
  std::string delimiter_;
  std::string prompt_;
  std::size_t k1_;
  std::size_t k2_;
  mutable std::mutex mu_;
  mutable std::map<std::vector<TokenId>, std::shared_ptr<const ArmWorld>> cache_;
  mutable std::map<std::string, LabelMask, std::less<>> lone_second_;
};

/// Exact distribution over complete sequences; sums to 1.
std::map<std::vector<TokenId>, double> enumerate_distribution(const ArmWorld& world);
std::map<std::vector<TokenId>, double> enumerate_distribution(const MdmWorld& world, int steps);

/// Exact p(c) obtained by summing the enumerated distribution per label.
std::vector<double> exact_cluster_probs(const ArmWorld& world);
std::vector<double> exact_cluster_probs(const MdmWorld& world, int steps);

/// Entropy (nats) of a probability vector; zero entries contribute nothing.
double entropy_of(std::span<const double> probs);

/// Correlation under p between X = −log p(y) and Y = −log p(c(y)).
double exact_logprob_cluster_correlation(const ArmWorld& world);

// ---------------------------------------------------------------------------
// Builders for the worlds used by tests, the simulate command and configs.

struct RandomArmParams {
  std::size_t vocab = 4;         // content tokens
  std::size_t max_length = 3;
  std::size_t clusters = 3;
  std::uint64_t seed = 1;
  double logit_scale = 1.5;
  double eos_bias = 0.0;         // added to the EOS logit for every position after the first
  std::size_t label_position = 0;
};

/// Random transition table; the label is a fixed token-to-cluster map applied
/// at `label_position` (or the last token of shorter sequences).
std::shared_ptr<ArmWorld> make_random_arm_world(const RandomArmParams& params);

struct RandomMdmParams {
  std::size_t vocab = 4;
  std::size_t length = 3;
  std::size_t clusters = 3;
  std::uint64_t seed = 1;
  double logit_scale = 1.5;
  std::size_t label_position = 0;
  ScheduleOrder order = ScheduleOrder::kLeftToRight;
};

std::shared_ptr<MdmWorld> make_random_mdm_world(const RandomMdmParams& params);

/// Two uninformative opener tokens followed by one answer token that fixes the
/// cluster; `cluster_probs` gives p(answer).
std::shared_ptr<ArmWorld> make_opener_world(const std::vector<double>& cluster_probs, std::string prompt = {});

/// Single-token answers, one per cluster, with the given probabilities.
std::shared_ptr<ArmWorld> make_categorical_world(const std::vector<double>& cluster_probs, std::string prompt = {});

/// A world with exactly one reachable sequence.
std::shared_ptr<ArmWorld> make_point_mass_world(std::size_t length);

/// Second answer repeats the first.
std::shared_ptr<PairWorld> make_copy_pair_world(std::shared_ptr<const ArmWorld> first);
/// Second answer is an independent draw from `second`.
std::shared_ptr<PairWorld> make_independent_pair_world(std::shared_ptr<const ArmWorld> first,
                                                       std::shared_ptr<const ArmWorld> second);

}  // namespace semsteer

#endif  // SEMSTEER_WORLDS_HPP
