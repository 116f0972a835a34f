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

#ifndef SEMSTEER_CLUSTERING_HPP
#define SEMSTEER_CLUSTERING_HPP

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semsteer/domain.hpp"
#include "semsteer/similarity.hpp"

namespace semsteer {

/// Partition aligned with sample order. Cluster ids are contiguous from 0 in
/// order of first appearance; the representative of a cluster is its
/// earliest member.
struct Clustering {
  std::vector<int> assignment;
  std::vector<std::size_t> representatives;

  std::size_t n_clusters() const noexcept { return representatives.size(); }
  std::vector<std::size_t> sizes() const;
};

enum class ClusterMode { kBinaryBidirectional, kThreshold };

struct ClusterConfig {
  ClusterMode mode = ClusterMode::kBinaryBidirectional;
  double tau = 0.5;
  bool concat_prompt = true;
  std::string delimiter = "||";

  void validate() const;
};

/// "<prompt> <answer>" (or the answer alone when the prompt is empty or
/// concatenation is off).
std::string clustering_text(std::string_view prompt, std::string_view answer, const ClusterConfig& cfg);
/// "<prompt> <answer1> || <answer2>".
std::string pair_clustering_text(std::string_view prompt, std::string_view first, std::string_view second,
                                 const ClusterConfig& cfg);

enum class PairSide { kFirst, kSecond };

/// Text of one answer of a pair clustered on its own. Second answers are
/// written as "<prompt> || <answer2>" so they are never read as first answers.
std::string side_clustering_text(std::string_view prompt, std::string_view answer, PairSide side,
                                 const ClusterConfig& cfg);

/// Greedy representative clustering that grows one sample at a time. Each
/// new text is compared only with the existing representatives (one scorer
/// batch per insertion) and joins the first that matches.
class IncrementalClusterer {
 public:
  IncrementalClusterer(const SimilarityScorer& scorer, ClusterConfig cfg);

  /// Cluster id assigned to `text`.
  int add(const std::string& text);
  const Clustering& clustering() const noexcept { return clustering_; }

 private:
  const SimilarityScorer& scorer_;
  ClusterConfig cfg_;
  std::vector<std::string> rep_texts_;
  Clustering clustering_;
};

/// Semantic-entropy clustering in generation order.
Clustering cluster_se(std::span<const std::string> texts, const SimilarityScorer& scorer, const ClusterConfig& cfg);

/// Threshold clustering of pair texts: joins the first center z* with
/// E(z*, z) >= tau.
Clustering cluster_mi(std::span<const std::string> pair_texts, const SimilarityScorer& scorer,
                      const ClusterConfig& cfg);

/// For each joint cluster, the marginal cluster of its center's answer on
/// one side, given the clustering of that side's individual answers (aligned
/// with the same sample order).
std::vector<int> marginal_cluster_index(const Clustering& joint, const Clustering& side);

}  // namespace semsteer

#endif  // SEMSTEER_CLUSTERING_HPP
