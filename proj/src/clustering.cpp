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

#include "semsteer/clustering.hpp"

#include "semsteer/error.hpp"

namespace semsteer {

std::vector<std::size_t> Clustering::sizes() const {
  std::vector<std::size_t> out(n_clusters(), 0);
  for (const int c : assignment) ++out.at(static_cast<std::size_t>(c));
  return out;
}

void ClusterConfig::validate() const {
  if (mode == ClusterMode::kThreshold && !(tau > 0.0 && tau < 1.0)) throw InvalidArgument("tau must be in (0, 1)");
  if (delimiter.empty()) throw InvalidArgument("delimiter must be non-empty");
}

std::string clustering_text(std::string_view prompt, std::string_view answer, const ClusterConfig& cfg) {
  if (!cfg.concat_prompt || prompt.empty()) return std::string(answer);
  std::string out(prompt);
  out += ' ';
  out += answer;
  return out;
}

std::string pair_clustering_text(std::string_view prompt, std::string_view first, std::string_view second,
                                 const ClusterConfig& cfg) {
  std::string joined(first);
  joined += ' ';
  joined += cfg.delimiter;
  joined += ' ';
  joined += second;
  return clustering_text(prompt, joined, cfg);
}

std::string side_clustering_text(std::string_view prompt, std::string_view answer, PairSide side,
                                 const ClusterConfig& cfg) {
  if (side == PairSide::kFirst) return clustering_text(prompt, answer, cfg);
  std::string marked = cfg.delimiter;
  marked += ' ';
  marked += answer;
  return clustering_text(prompt, marked, cfg);
}

IncrementalClusterer::IncrementalClusterer(const SimilarityScorer& scorer, ClusterConfig cfg)
    : scorer_(scorer), cfg_(std::move(cfg)) {
  cfg_.validate();
}

int IncrementalClusterer::add(const std::string& text) {
  const std::size_t index = clustering_.assignment.size();
  int assigned = -1;
  if (!rep_texts_.empty()) {
    std::vector<NliPair> pairs;
    pairs.reserve(rep_texts_.size() * 2);
    for (const auto& rep : rep_texts_) {
      pairs.push_back({text, rep});
      pairs.push_back({rep, text});
    }
    const auto probs = scorer_.classify_batch(pairs);
    if (probs.size() != pairs.size()) throw ProtocolError("scorer returned the wrong number of results");
    for (std::size_t k = 0; k < rep_texts_.size() && assigned < 0; ++k) {
      const NliProbs& fwd = probs[2 * k];
      const NliProbs& bwd = probs[2 * k + 1];
      const bool same = cfg_.mode == ClusterMode::kBinaryBidirectional
                            ? fwd.entails() && bwd.entails()
                            : 0.5 * (fwd.entail + bwd.entail) >= cfg_.tau;
      if (same) assigned = static_cast<int>(k);
    }
  }
  if (assigned < 0) {
    assigned = static_cast<int>(rep_texts_.size());
    rep_texts_.push_back(text);
    clustering_.representatives.push_back(index);
  }
  clustering_.assignment.push_back(assigned);
  return assigned;
}

Clustering cluster_se(std::span<const std::string> texts, const SimilarityScorer& scorer, const ClusterConfig& cfg) {
  if (texts.empty()) throw InvalidArgument("cannot cluster an empty sample list");
  IncrementalClusterer c(scorer, cfg);
  for (const auto& t : texts) c.add(t);
  return c.clustering();
}

Clustering cluster_mi(std::span<const std::string> pair_texts, const SimilarityScorer& scorer,
                      const ClusterConfig& cfg) {
  if (cfg.mode != ClusterMode::kThreshold) throw InvalidArgument("MI clustering requires threshold mode");
  return cluster_se(pair_texts, scorer, cfg);
}

std::vector<int> marginal_cluster_index(const Clustering& joint, const Clustering& side) {
  if (joint.assignment.size() != side.assignment.size()) {
    throw InvalidArgument("joint and marginal clusterings are not aligned");
  }
  std::vector<int> out;
  out.reserve(joint.n_clusters());
  for (const std::size_t rep : joint.representatives) out.push_back(side.assignment.at(rep));
  return out;
}

}  // namespace semsteer
