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

#include "semsteer/similarity.hpp"

#include <algorithm>
#include <bit>

#include "semsteer/error.hpp"

namespace semsteer {

NliProbs SimilarityScorer::classify(std::string premise, std::string hypothesis) const {
  const NliPair pair{std::move(premise), std::move(hypothesis)};
  return classify_batch(std::span<const NliPair>(&pair, 1)).at(0);
}

double SimilarityScorer::entail(std::string premise, std::string hypothesis) const {
  return classify(std::move(premise), std::move(hypothesis)).entail;
}

std::string_view to_string(PartialMarking m) {
  switch (m) {
    case PartialMarking::kTruncSuffix:
      return "trunc_suffix";
    case PartialMarking::kMaskInline:
      return "mask_inline";
    case PartialMarking::kNone:
      return "none";
  }
  return "none";
}

std::string_view to_string(Aggregation a) {
  switch (a) {
    case Aggregation::kMax:
      return "max";
    case Aggregation::kMean:
      return "mean";
    case Aggregation::kMedian:
      return "median";
  }
  return "max";
}

PartialMarking parse_marking(std::string_view s) {
  if (s == "trunc_suffix") return PartialMarking::kTruncSuffix;
  if (s == "mask_inline") return PartialMarking::kMaskInline;
  if (s == "none") return PartialMarking::kNone;
  throw InvalidArgument("unknown marking '" + std::string(s) + "'");
}

Aggregation parse_aggregation(std::string_view s) {
  if (s == "max") return Aggregation::kMax;
  if (s == "mean") return Aggregation::kMean;
  if (s == "median") return Aggregation::kMedian;
  throw InvalidArgument("unknown aggregation '" + std::string(s) + "'");
}

std::string mark_partial(std::string text, PartialMarking marking, bool finished) {
  if (marking != PartialMarking::kTruncSuffix || finished) return text;
  if (text.size() >= kTruncMarker.size() && text.compare(text.size() - kTruncMarker.size(), kTruncMarker.size(),
                                                         kTruncMarker) == 0) {
    return text;
  }
  if (!text.empty()) text += ' ';
  text += kTruncMarker;
  return text;
}

std::vector<double> bidirectional_scores(const SimilarityScorer& scorer, std::span<const NliPair> pairs) {
  std::vector<NliPair> both;
  both.reserve(pairs.size() * 2);
  for (const auto& p : pairs) {
    if (p.premise.empty() || p.hypothesis.empty()) {
      throw ScoringError("bidirectional score needs non-empty texts", p.premise, p.hypothesis);
    }
    both.push_back(p);
    both.push_back({p.hypothesis, p.premise});
  }
  std::vector<NliProbs> probs;
  try {
    probs = scorer.classify_batch(both);
  } catch (const ScoringError&) {
    throw;
  } catch (const Error& e) {
    const auto& first = pairs.empty() ? NliPair{} : pairs.front();
    throw ScoringError(std::string("scorer failed: ") + e.what(), first.premise, first.hypothesis);
  }
  if (probs.size() != both.size()) throw ProtocolError("scorer returned the wrong number of results");
  std::vector<double> out(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) out[i] = 0.5 * (probs[2 * i].entail + probs[2 * i + 1].entail);
  return out;
}

double bidirectional_score(const SimilarityScorer& scorer, const std::string& a, const std::string& b) {
  const NliPair pair{a, b};
  return bidirectional_scores(scorer, std::span<const NliPair>(&pair, 1)).front();
}

double aggregate(std::vector<double> scores, Aggregation agg) {
  if (scores.empty()) return 0.0;
  switch (agg) {
    case Aggregation::kMax:
      return *std::max_element(scores.begin(), scores.end());
    case Aggregation::kMean: {
      double s = 0.0;
      for (const double v : scores) s += v;
      return s / static_cast<double>(scores.size());
    }
    case Aggregation::kMedian: {
      std::sort(scores.begin(), scores.end());
      const std::size_t n = scores.size();
      return n % 2 == 1 ? scores[n / 2] : 0.5 * (scores[n / 2 - 1] + scores[n / 2]);
    }
  }
  return 0.0;
}

double penalty(const SimilarityScorer& scorer, const std::string& candidate, std::span<const std::string> pool,
               Aggregation agg) {
  if (pool.empty()) return 0.0;
  std::vector<NliPair> pairs;
  pairs.reserve(pool.size());
  for (const auto& s : pool) pairs.push_back({candidate, s});
  return aggregate(bidirectional_scores(scorer, pairs), agg);
}

// ---------------------------------------------------------------------------
// SteeringPool

SteeringPool::SteeringPool(const SimilarityScorer& scorer, Aggregation agg) : scorer_(scorer), agg_(agg) {}

void SteeringPool::add(const std::string& text) {
  ++total_;
  const auto it = index_.find(text);
  if (it == index_.end()) {
    index_.emplace(text, texts_.size());
    texts_.push_back(text);
    counts_.push_back(1);
    return;
  }
  const std::size_t j = it->second;
  ++counts_[j];
  for (auto& [cand, e] : cache_) {
    if (e.scores.size() > j) e.weighted_sum += e.scores[j];
  }
}

double SteeringPool::value_of(const Entry& e) const {
  if (total_ == 0) return 0.0;
  switch (agg_) {
    case Aggregation::kMax:
      return e.max;
    case Aggregation::kMean:
      return e.weighted_sum / static_cast<double>(total_);
    case Aggregation::kMedian: {
      std::vector<double> expanded;
      expanded.reserve(total_);
      for (std::size_t j = 0; j < e.scores.size(); ++j) expanded.insert(expanded.end(), counts_[j], e.scores[j]);
      return aggregate(std::move(expanded), Aggregation::kMedian);
    }
  }
  return 0.0;
}

std::vector<double> SteeringPool::penalties(std::span<const std::string> candidates) {
  std::vector<double> out(candidates.size(), 0.0);
  if (texts_.empty()) return out;

  std::vector<NliPair> batch;
  std::vector<std::pair<Entry*, std::size_t>> slots;
  std::unordered_map<std::string, bool> queued;
  for (const auto& c : candidates) {
    Entry& e = cache_[c];
    if (e.scores.size() == texts_.size() || queued.count(c)) continue;
    queued.emplace(c, true);
    for (std::size_t j = e.scores.size(); j < texts_.size(); ++j) {
      batch.push_back({c, texts_[j]});
      slots.emplace_back(&e, j);
    }
  }
  if (!batch.empty()) {
    const auto scores = bidirectional_scores(scorer_, batch);
    scorer_pairs_ += batch.size();
    for (std::size_t i = 0; i < scores.size(); ++i) {
      Entry& e = *slots[i].first;
      const std::size_t j = slots[i].second;
      if (e.scores.size() != j) throw Error("steering cache out of order");
      e.scores.push_back(scores[i]);
      e.max = e.scores.size() == 1 ? scores[i] : std::max(e.max, scores[i]);
      e.weighted_sum += static_cast<double>(counts_[j]) * scores[i];
    }
  }
  for (std::size_t i = 0; i < candidates.size(); ++i) out[i] = value_of(cache_.at(candidates[i]));
  return out;
}

// ---------------------------------------------------------------------------
// OracleScorer

OracleScorer::OracleScorer(std::shared_ptr<const TextLabeler> labeler, double noise)
    : labeler_(std::move(labeler)), noise_(noise) {
  if (!labeler_) throw InvalidArgument("oracle scorer needs a labeler");
  if (!(noise_ >= 0.0 && noise_ < 0.5)) throw InvalidArgument("oracle noise must be in [0, 0.5)");
}

NliProbs OracleScorer::classify_one(const NliPair& pair) const {
  LabelMask a = 0;
  LabelMask b = 0;
  try {
    a = labeler_->consistent_labels(pair.premise);
    b = labeler_->consistent_labels(pair.hypothesis);
  } catch (const ScoringError& e) {
    throw ScoringError(e.what(), pair.premise, pair.hypothesis);
  }
  if (std::popcount(a) != 1 || std::popcount(b) != 1) return {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  if (a == b) return {1.0 - noise_, noise_, 0.0};
  return {noise_, 0.0, 1.0 - noise_};
}

std::vector<NliProbs> OracleScorer::classify_batch(std::span<const NliPair> pairs) const {
  std::vector<NliProbs> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(classify_one(p));
  return out;
}

std::shared_ptr<OracleScorer> oracle_scorer(std::shared_ptr<const TextLabeler> labeler, double noise) {
  return std::make_shared<OracleScorer>(std::move(labeler), noise);
}

}  // namespace semsteer
