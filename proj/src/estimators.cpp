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

#include "semsteer/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "semsteer/error.hpp"

namespace semsteer {

namespace {

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

void check_aligned(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw InvalidArgument(std::string(what) + ": length mismatch");
}

double weighted_mean(std::span<const double> v, std::span<const double> w) {
  double m = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) m += w[i] * v[i];
  return m;
}

}  // namespace

std::vector<double> cluster_probs(std::span<const double> normalized_weights, const Clustering& clustering) {
  check_aligned(normalized_weights.size(), clustering.assignment.size(), "cluster_probs");
  std::vector<double> probs(clustering.n_clusters(), 0.0);
  for (std::size_t i = 0; i < normalized_weights.size(); ++i) {
    const int c = clustering.assignment[i];
    if (c < 0 || static_cast<std::size_t>(c) >= probs.size()) throw InvalidArgument("cluster id out of range");
    probs[static_cast<std::size_t>(c)] += normalized_weights[i];
  }
  return probs;
}

double semantic_entropy(std::span<const double> probs) {
  double h = 0.0;
  for (const double p : probs) {
    if (p < 0.0) throw InvalidArgument("negative probability");
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double alpha_star(std::span<const double> x, std::span<const double> y, std::span<const double> w_tilde) {
  check_aligned(x.size(), y.size(), "alpha_star");
  check_aligned(x.size(), w_tilde.size(), "alpha_star");
  const double mx = weighted_mean(x, w_tilde);
  const double my = weighted_mean(y, w_tilde);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    num += w_tilde[i] * dx * (y[i] - my);
    den += w_tilde[i] * dx * dx;
  }
  if (den < 1e-12) return 0.0;
  return num / den;
}

double weighted_correlation(std::span<const double> x, std::span<const double> y, std::span<const double> w_tilde) {
  check_aligned(x.size(), y.size(), "weighted_correlation");
  check_aligned(x.size(), w_tilde.size(), "weighted_correlation");
  const double mx = weighted_mean(x, w_tilde);
  const double my = weighted_mean(y, w_tilde);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += w_tilde[i] * dx * dy;
    sxx += w_tilde[i] * dx * dx;
    syy += w_tilde[i] * dy * dy;
  }
  if (sxx < 1e-300 || syy < 1e-300) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::string_view to_string(CvMode m) {
  switch (m) {
    case CvMode::kWeightedMean: return "weighted_mean";
    case CvMode::kKnownMean: return "known_mean";
    case CvMode::kPathwiseEntropy: return "pathwise_entropy";
  }
  return "unknown";
}

CvMode parse_cv_mode(std::string_view s) {
  if (s == "weighted_mean") return CvMode::kWeightedMean;
  if (s == "known_mean") return CvMode::kKnownMean;
  if (s == "pathwise_entropy") return CvMode::kPathwiseEntropy;
  throw InvalidArgument("unknown control-variate mode '" + std::string(s) + "'");
}

CvEstimate control_variate(std::span<const double> x, std::span<const double> y, std::span<const double> w_tilde,
                           std::optional<double> mu_x) {
  check_aligned(x.size(), y.size(), "control_variate");
  check_aligned(x.size(), w_tilde.size(), "control_variate");
  CvEstimate out;
  out.mode = mu_x ? CvMode::kKnownMean : CvMode::kWeightedMean;
  out.value = weighted_mean(y, w_tilde);
  out.alpha = alpha_star(x, y, w_tilde);
  out.rho = weighted_correlation(x, y, w_tilde);
  const double mean_x = weighted_mean(x, w_tilde);
  const double shift = mu_x ? mean_x - *mu_x : 0.0;
  out.value_cv = out.value - out.alpha * shift;
  return out;
}

namespace {

template <class Sample, class XFn, class CFn>
CvEstimate apply_mode(const WeightedSet<Sample>& set, std::span<const double> y, CvMode mode,
                      std::optional<double> known_mean, XFn x_of, CFn compensator_of) {
  const auto& w = set.normalized_weights();
  std::vector<double> x(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) x[i] = x_of(set.samples()[i]);

  if (mode == CvMode::kKnownMean) {
    if (!known_mean) throw InvalidArgument("known_mean mode needs the mean of the control variate");
    return control_variate(x, y, w, known_mean);
  }
  if (mode == CvMode::kPathwiseEntropy) {
    bool available = true;
    for (std::size_t i = 0; i < set.size() && available; ++i) {
      const double c = compensator_of(set.samples()[i]);
      if (!std::isfinite(c)) {
        available = false;
      } else {
        x[i] -= c;
      }
    }
    if (available) {
      CvEstimate out = control_variate(x, y, w, 0.0);
      out.mode = CvMode::kPathwiseEntropy;
      return out;
    }
    for (std::size_t i = 0; i < set.size(); ++i) x[i] = x_of(set.samples()[i]);
  }
  return control_variate(x, y, w, std::nullopt);
}

}  // namespace

CvEstimate se_with_cv(const SampleSet& set, const Clustering& clustering, CvMode mode,
                      std::optional<double> known_mean) {
  if (set.empty()) throw InvalidArgument("empty sample set");
  const auto probs = cluster_probs(set, clustering);
  std::vector<double> y(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) y[i] = -std::log(probs[static_cast<std::size_t>(clustering.assignment[i])]);
  return apply_mode(
      set, y, mode, known_mean, [](const SequenceSample& s) { return -s.logp; },
      [](const SequenceSample& s) { return s.entropy_compensator(); });
}

std::vector<double> marginal_probs(std::span<const double> joint, std::span<const int> index) {
  check_aligned(joint.size(), index.size(), "marginal_probs");
  int k = 0;
  for (const int c : index) {
    if (c < 0) throw InvalidArgument("negative marginal cluster id");
    k = std::max(k, c + 1);
  }
  std::vector<double> out(static_cast<std::size_t>(k), 0.0);
  for (std::size_t c = 0; c < joint.size(); ++c) out[static_cast<std::size_t>(index[c])] += joint[c];
  return out;
}

CvEstimate mi_with_cv(const PairSet& set, const Clustering& joint, std::span<const int> first_map,
                      std::span<const int> second_map, CvMode mode, std::optional<double> known_mean) {
  if (set.empty()) throw InvalidArgument("empty sample set");
  const auto probs = cluster_probs(set, joint);
  const auto m1 = marginal_probs(probs, first_map);
  const auto m2 = marginal_probs(probs, second_map);
  std::vector<double> y(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto c = static_cast<std::size_t>(joint.assignment[i]);
    const double product = m1[static_cast<std::size_t>(first_map[c])] * m2[static_cast<std::size_t>(second_map[c])];
    if (!(product > 0.0)) throw Error("support violation");
    y[i] = std::log(probs[c] / product);
  }
  // X = log p(s1, s2); its pathwise compensator is −Σ H over both answers.
  return apply_mode(
      set, y, mode, known_mean, [](const SamplePair& s) { return s.logp_joint; },
      [](const SamplePair& s) { return -(s.first.entropy_compensator() + s.second.entropy_compensator()); });
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(values.size() - 1);
}

double update_lambda_sequence(double lambda, std::span<const double> running_se, const SeqLambdaConfig& cfg) {
  if (running_se.size() < 2 || cfg.eta_seq == 0.0) return lambda;
  return std::max(0.0, lambda + cfg.eta_seq * (sample_variance(running_se) - cfg.v_target));
}

void StoppingConfig::validate() const {
  if (window < 2) throw InvalidArgument("stopping window must be >= 2");
  if (!(epsilon > 0.0)) throw InvalidArgument("stopping epsilon must be > 0");
  if (!(min_ess_ratio > 0.0 && min_ess_ratio <= 1.0)) throw InvalidArgument("min_ess_ratio must be in (0, 1]");
}

bool should_stop(std::span<const double> history, double ess_ratio, const StoppingConfig& cfg) {
  if (history.size() < cfg.window) return false;
  if (ess_ratio < cfg.min_ess_ratio) return false;
  const auto tail = history.last(cfg.window);
  const auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
  return *hi - *lo <= cfg.epsilon;
}

void RunningClusterMass::add(double log_weight, int cluster) {
  if (!std::isfinite(log_weight)) throw InvalidArgument("non-finite log ratio");
  if (cluster < 0) throw InvalidArgument("negative cluster id");
  const auto c = static_cast<std::size_t>(cluster);
  if (c >= log_mass_.size()) log_mass_.resize(c + 1, -std::numeric_limits<double>::infinity());
  log_mass_[c] = log_add(log_mass_[c], log_weight);
  log_total_ = log_add(log_total_, log_weight);
  log_square_ = log_add(log_square_, 2.0 * log_weight);
  ++n_;
}

std::vector<double> RunningClusterMass::probs() const {
  std::vector<double> out(log_mass_.size(), 0.0);
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = std::exp(log_mass_[c] - log_total_);
  return out;
}

double RunningClusterMass::entropy() const { return semantic_entropy(probs()); }

double RunningClusterMass::ess() const {
  if (n_ == 0) return 0.0;
  return std::exp(2.0 * log_total_ - log_square_);
}

}  // namespace semsteer
