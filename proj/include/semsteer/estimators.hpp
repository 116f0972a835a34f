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

#ifndef SEMSTEER_ESTIMATORS_HPP
#define SEMSTEER_ESTIMATORS_HPP

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "semsteer/clustering.hpp"
#include "semsteer/domain.hpp"

namespace semsteer {

/// p̂(c) = Σ_{i∈c} w̃_i.
std::vector<double> cluster_probs(std::span<const double> normalized_weights, const Clustering& clustering);
template <class Sample>
std::vector<double> cluster_probs(const WeightedSet<Sample>& set, const Clustering& clustering) {
  return cluster_probs(set.normalized_weights(), clustering);
}

/// −Σ p log p with 0·log 0 = 0.
double semantic_entropy(std::span<const double> probs);

/// Σ w̃ X′Y′ / Σ w̃ X′² with X′, Y′ centered at their weighted means; 0 when
/// the denominator is below 1e-12.
double alpha_star(std::span<const double> x, std::span<const double> y, std::span<const double> w_tilde);

/// Weighted Pearson correlation of x and y; 0 when either is constant.
double weighted_correlation(std::span<const double> x, std::span<const double> y, std::span<const double> w_tilde);

/// How the control variate is centered.
///   kWeightedMean: at its own weighted mean, so the correction vanishes.
///   kKnownMean: at a mean supplied by the caller.
///   kPathwiseEntropy: at Σ_t H_t, the summed entropies of the base
///     conditionals along the sample's own path, which has mean zero under p.
enum class CvMode { kWeightedMean, kKnownMean, kPathwiseEntropy };

std::string_view to_string(CvMode m);
CvMode parse_cv_mode(std::string_view s);

struct CvEstimate {
  double value = 0.0;      // Σ w̃ Y
  double value_cv = 0.0;   // value − α*·(Σ w̃ X − μ_X)
  double alpha = 0.0;
  double rho = 0.0;        // weighted correlation of the control with Y
  CvMode mode = CvMode::kWeightedMean;
};

/// Control-variate correction of Σ w̃ y using x with mean `mu_x` under p; the
/// weighted mean of x is used when `mu_x` is empty.
CvEstimate control_variate(std::span<const double> x, std::span<const double> y, std::span<const double> w_tilde,
                           std::optional<double> mu_x);

/// Semantic entropy with Y_i = −log p̂(c_i) and X_i = −log p(s_i). For
/// kKnownMean, `known_mean` is E_p[−log p(s)]. kPathwiseEntropy falls back to
/// kWeightedMean when any step lacks its base entropy.
CvEstimate se_with_cv(const SampleSet& set, const Clustering& clustering, CvMode mode = CvMode::kPathwiseEntropy,
                      std::optional<double> known_mean = std::nullopt);

/// Marginal cluster probabilities obtained by summing joint mass through an
/// index map.
std::vector<double> marginal_probs(std::span<const double> joint, std::span<const int> index);

/// Mutual information with Y_i = log(p̂(c_i)/p̂⊗(c_i)) and X_i = log p(s1, s2).
/// For kKnownMean, `known_mean` is E_p[log p(s1, s2)].
CvEstimate mi_with_cv(const PairSet& set, const Clustering& joint, std::span<const int> first_map,
                      std::span<const int> second_map, CvMode mode = CvMode::kPathwiseEntropy,
                      std::optional<double> known_mean = std::nullopt);

struct SeqLambdaConfig {
  double eta_seq = 0.0;
  double v_target = 0.0;
};

/// Sample variance (n − 1); 0 for fewer than two values.
double sample_variance(std::span<const double> values);

/// max(0, λ + η_seq(Var(running_se) − V_target)); unchanged for fewer than two
/// running estimates.
double update_lambda_sequence(double lambda, std::span<const double> running_se, const SeqLambdaConfig& cfg);

struct StoppingConfig {
  std::size_t window = 4;
  double epsilon = 0.02;
  double min_ess_ratio = 0.4;

  void validate() const;
};

/// True when the last `window` running estimates span at most epsilon and
/// the ESS ratio is above its floor.
bool should_stop(std::span<const double> history, double ess_ratio, const StoppingConfig& cfg);

/// Running self-normalized cluster masses, updated one sample at a time.
class RunningClusterMass {
 public:
  void add(double log_weight, int cluster);

  std::size_t n() const noexcept { return n_; }
  std::vector<double> probs() const;
  double entropy() const;
  double ess() const;

 private:
  std::vector<double> log_mass_;
  double log_total_ = -std::numeric_limits<double>::infinity();
  double log_square_ = -std::numeric_limits<double>::infinity();
  std::size_t n_ = 0;
};

}  // namespace semsteer

#endif  // SEMSTEER_ESTIMATORS_HPP
