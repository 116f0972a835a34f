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

#ifndef SEMSTEER_SIMILARITY_HPP
#define SEMSTEER_SIMILARITY_HPP

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "semsteer/worlds.hpp"

namespace semsteer {

/// Three-class NLI output.
struct NliProbs {
  double entail = 0.0;
  double neutral = 0.0;
  double contradict = 0.0;

  /// True when entailment is the strict argmax.
  bool entails() const noexcept { return entail > neutral && entail > contradict; }
};

struct NliPair {
  std::string premise;
  std::string hypothesis;
};

/// Black-box entailment model. Must be deterministic and callable
/// concurrently; backends receive whole batches.
class SimilarityScorer {
 public:
  virtual ~SimilarityScorer() = default;
  virtual std::vector<NliProbs> classify_batch(std::span<const NliPair> pairs) const = 0;
  virtual bool supports_partial() const { return true; }

  NliProbs classify(std::string premise, std::string hypothesis) const;
  double entail(std::string premise, std::string hypothesis) const;
};

enum class PartialMarking { kTruncSuffix, kMaskInline, kNone };
enum class Aggregation { kMax, kMean, kMedian };

std::string_view to_string(PartialMarking m);
std::string_view to_string(Aggregation a);
PartialMarking parse_marking(std::string_view s);
Aggregation parse_aggregation(std::string_view s);

/// Applies a marking to a partial text. TRUNC_SUFFIX appends the truncation
/// marker to unfinished text (once); the other modes leave it unchanged.
std::string mark_partial(std::string text, PartialMarking marking, bool finished);

/// ½(entail(a,b) + entail(b,a)).
double bidirectional_score(const SimilarityScorer& scorer, const std::string& a, const std::string& b);

/// Bidirectional scores of every (a_i, b_i) in one scorer batch.
std::vector<double> bidirectional_scores(const SimilarityScorer& scorer, std::span<const NliPair> pairs);

/// Aggregate of scores; 0 for an empty list.
double aggregate(std::vector<double> scores, Aggregation agg);

/// Aggregated similarity of a candidate against the pool; 0 for an empty pool.
double penalty(const SimilarityScorer& scorer, const std::string& candidate, std::span<const std::string> pool,
               Aggregation agg);

/// Running set of previously generated texts for one prompt with a per-run
/// score cache. The pool only grows, so each candidate keeps its scores
/// against the distinct pool texts it has already been compared with; a
/// query only scores the texts added since.
class SteeringPool {
 public:
  SteeringPool(const SimilarityScorer& scorer, Aggregation agg);

  void add(const std::string& text);
  std::size_t size() const noexcept { return total_; }
  std::size_t distinct() const noexcept { return texts_.size(); }
  const std::vector<std::string>& texts() const noexcept { return texts_; }

  /// Penalty of every candidate; all missing scores go out in one batch.
  std::vector<double> penalties(std::span<const std::string> candidates);
  std::size_t scorer_pairs() const noexcept { return scorer_pairs_; }

 private:
  struct Entry {
    std::vector<double> scores;  // against texts_[0..scores.size())
    double max = 0.0;
    double weighted_sum = 0.0;
  };

  double value_of(const Entry& e) const;

  const SimilarityScorer& scorer_;
  Aggregation agg_;
  std::vector<std::string> texts_;
  std::vector<std::size_t> counts_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_map<std::string, Entry> cache_;
  std::size_t total_ = 0;
  std::size_t scorer_pairs_ = 0;
};

/// Ground-truth scorer driven by world labels: entail = 1 − noise for
/// texts in the same cluster, noise otherwise, and the uniform 1/3 guess when
/// either side is semantically undetermined.
class OracleScorer final : public SimilarityScorer {
 public:
  OracleScorer(std::shared_ptr<const TextLabeler> labeler, double noise);
  std::vector<NliProbs> classify_batch(std::span<const NliPair> pairs) const override;

 private:
  NliProbs classify_one(const NliPair& pair) const;

  std::shared_ptr<const TextLabeler> labeler_;
  double noise_;
};

std::shared_ptr<OracleScorer> oracle_scorer(std::shared_ptr<const TextLabeler> labeler, double noise);

}  // namespace semsteer

#endif  // SEMSTEER_SIMILARITY_HPP
