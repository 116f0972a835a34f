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

#include "semsteer/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "semsteer/error.hpp"

namespace semsteer {

namespace {

std::vector<double> tail(const std::vector<double>& v, std::size_t m) {
  const std::size_t k = std::min(m, v.size());
  return {v.end() - static_cast<std::ptrdiff_t>(k), v.end()};
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

double running_mi(const RunningClusterMass& joint, const std::vector<int>& first_map,
                  const std::vector<int>& second_map) {
  const auto p = joint.probs();
  const std::span<const int> f(first_map.data(), p.size());
  const std::span<const int> s(second_map.data(), p.size());
  const auto m1 = marginal_probs(p, f);
  const auto m2 = marginal_probs(p, s);
  double mi = 0.0;
  for (std::size_t c = 0; c < p.size(); ++c) {
    if (p[c] > 0.0) mi += p[c] * std::log(p[c] / (m1[static_cast<std::size_t>(f[c])] * m2[static_cast<std::size_t>(s[c])]));
  }
  return mi;
}

}  // namespace

namespace {

// Incremental clustering and running estimate for one prompt.
class SeAccumulator {
 public:
  SeAccumulator(const SimilarityScorer& scorer, const SeRunConfig& cfg) : cfg_(cfg), clusterer_(scorer, cfg.cluster) {}

  void add(SequenceSample s) {
    const int c = clusterer_.add(clustering_text(cfg_.prompt, s.sequence.text, cfg_.cluster));
    mass_.add(s.log_weight(), c);
    history_.push_back(mass_.entropy());
    samples_.push_back(std::move(s));
  }

  const std::vector<double>& history() const noexcept { return history_; }
  double ess_ratio() const { return mass_.ess() / static_cast<double>(mass_.n()); }

  SeRun finish(bool stopped) {
    SeRun run;
    run.samples = SampleSet(std::move(samples_));
    run.clustering = clusterer_.clustering();
    const CvEstimate est = se_with_cv(run.samples, run.clustering, cfg_.cv_mode, cfg_.known_mean);
    const auto probs = cluster_probs(run.samples, run.clustering);
    EstimateReport& r = run.report;
    r.prompt_id = cfg_.prompt_id;
    r.task = "se";
    r.n = run.samples.size();
    r.se = est.value;
    r.se_cv = est.value_cv;
    r.alpha_se = est.alpha;
    r.ess = run.samples.ess();
    r.n_clusters = run.clustering.n_clusters();
    r.stopped_early = stopped;
    r.history = std::move(history_);
    r.assignment = run.clustering.assignment;
    r.representatives = run.clustering.representatives;
    r.cluster_sizes = run.clustering.sizes();
    r.cv_mode = std::string(to_string(est.mode));
    r.best_answer = run.samples.samples()[run.clustering.representatives[argmax(probs)]].sequence.text;
    return run;
  }

 private:
  const SeRunConfig& cfg_;
  IncrementalClusterer clusterer_;
  RunningClusterMass mass_;
  std::vector<double> history_;
  std::vector<SequenceSample> samples_;
};

}  // namespace

SeRun run_se(const SequenceDraw& draw, const SimilarityScorer& scorer, const SeRunConfig& cfg, Rng& rng) {
  if (cfg.n == 0) throw InvalidArgument("N must be >= 1");
  if (cfg.stopping) cfg.stopping->validate();
  SteeringPool pool(scorer, cfg.aggregation);
  SeAccumulator acc(scorer, cfg);
  std::vector<double> lambda_starts;
  double lambda = cfg.lambda0;
  bool stopped = false;

  for (std::size_t i = 0; i < cfg.n; ++i) {
    lambda_starts.push_back(lambda);
    SequenceSample s = draw(pool, rng, lambda);
    pool.add(s.sequence.text);
    acc.add(std::move(s));
    lambda = update_lambda_sequence(lambda, tail(acc.history(), cfg.seq_lambda_window), cfg.seq_lambda);
    if (cfg.stopping && i + 1 < cfg.n && should_stop(acc.history(), acc.ess_ratio(), *cfg.stopping)) {
      stopped = true;
      break;
    }
  }
  SeRun run = acc.finish(stopped);
  run.lambda_starts = std::move(lambda_starts);
  return run;
}

SeRun estimate_se(std::vector<SequenceSample> samples, const SimilarityScorer& scorer, const SeRunConfig& cfg) {
  if (samples.empty()) throw InvalidArgument("empty sample set");
  SeAccumulator acc(scorer, cfg);
  std::vector<double> lambda_starts;
  for (auto& s : samples) {
    lambda_starts.push_back(s.steps.empty() ? 0.0 : s.steps.front().lambda);
    acc.add(std::move(s));
  }
  SeRun run = acc.finish(false);
  run.lambda_starts = std::move(lambda_starts);
  return run;
}

SeRun run_se(const ArmSampler& sampler, const SimilarityScorer& scorer, const SeRunConfig& cfg, Rng& rng) {
  SeRunConfig c = cfg;
  c.lambda0 = sampler.config().lambda0;
  c.aggregation = sampler.config().aggregation;
  return run_se(
      [&](SteeringPool& pool, Rng& g, double lambda) { return sampler.sample_sequence(pool, g, lambda); }, scorer, c,
      rng);
}

SeRun run_se(const MdmSampler& sampler, const SimilarityScorer& scorer, const SeRunConfig& cfg, Rng& rng) {
  SeRunConfig c = cfg;
  c.lambda0 = sampler.config().lambda0;
  c.aggregation = sampler.config().aggregation;
  return run_se(
      [&](SteeringPool& pool, Rng& g, double lambda) { return sampler.sample_sequence(pool, g, lambda); }, scorer, c,
      rng);
}

JointTextModel::JointTextModel(const ArmModel& inner, std::string first_answer, std::string delimiter)
    : inner_(inner), head_(std::move(first_answer) + " " + delimiter + " ") {}

std::string JointTextModel::decode(std::span<const TokenId> tokens) const { return head_ + inner_.decode(tokens); }

namespace {

class MiAccumulator {
 public:
  MiAccumulator(const SimilarityScorer& scorer, const MiRunConfig& cfg)
      : cfg_(cfg),
        side_cfg_(side_config(cfg.cluster)),
        joint_(scorer, cfg.cluster),
        first_(scorer, side_cfg_),
        second_(scorer, side_cfg_) {
    if (cfg.cluster.mode != ClusterMode::kThreshold) throw InvalidArgument("MI clustering requires threshold mode");
  }

  void add(SamplePair pair) {
    const auto& a1 = pair.first.sequence.text;
    const auto& a2 = pair.second.sequence.text;
    const int c = joint_.add(pair_clustering_text(cfg_.prompt, a1, a2, cfg_.cluster));
    const int c1 = first_.add(side_clustering_text(cfg_.prompt, a1, PairSide::kFirst, side_cfg_));
    const int c2 = second_.add(side_clustering_text(cfg_.prompt, a2, PairSide::kSecond, side_cfg_));
    if (static_cast<std::size_t>(c) == first_map_.size()) {
      first_map_.push_back(c1);
      second_map_.push_back(c2);
    }
    mass_.add(pair.log_weight(), c);
    history_.push_back(running_mi(mass_, first_map_, second_map_));
    pairs_.push_back(std::move(pair));
  }

  const std::vector<double>& history() const noexcept { return history_; }
  double ess_ratio() const { return mass_.ess() / static_cast<double>(mass_.n()); }

  MiRun finish(bool stopped) {
    MiRun run;
    run.pairs = PairSet(std::move(pairs_));
    run.joint = joint_.clustering();
    run.first = first_.clustering();
    run.second = second_.clustering();
    run.first_map = std::move(first_map_);
    run.second_map = std::move(second_map_);
    const CvEstimate est =
        mi_with_cv(run.pairs, run.joint, run.first_map, run.second_map, cfg_.cv_mode, cfg_.known_mean);
    const auto probs = cluster_probs(run.pairs, run.joint);
    EstimateReport& r = run.report;
    r.prompt_id = cfg_.prompt_id;
    r.task = "mi";
    r.n = run.pairs.size();
    r.se = semantic_entropy(marginal_probs(probs, run.first_map));
    r.se_cv = r.se;
    r.mi = est.value;
    r.mi_cv = est.value_cv;
    r.alpha_mi = est.alpha;
    r.ess = run.pairs.ess();
    r.n_clusters = run.joint.n_clusters();
    r.stopped_early = stopped;
    r.history = std::move(history_);
    r.assignment = run.joint.assignment;
    r.representatives = run.joint.representatives;
    r.cluster_sizes = run.joint.sizes();
    r.cv_mode = std::string(to_string(est.mode));
    const auto& best = run.pairs.samples()[run.joint.representatives[argmax(probs)]];
    r.best_answer = best.first.sequence.text + " " + cfg_.cluster.delimiter + " " + best.second.sequence.text;
    return run;
  }

 private:
  static ClusterConfig side_config(ClusterConfig c) {
    c.mode = ClusterMode::kBinaryBidirectional;
    return c;
  }

  const MiRunConfig& cfg_;
  ClusterConfig side_cfg_;
  IncrementalClusterer joint_;
  IncrementalClusterer first_;
  IncrementalClusterer second_;
  RunningClusterMass mass_;
  std::vector<int> first_map_;
  std::vector<int> second_map_;
  std::vector<double> history_;
  std::vector<SamplePair> pairs_;
};

}  // namespace

MiRun run_mi(const ArmChain& chain, const ArmSamplerConfig& sampler_cfg, const SimilarityScorer& scorer,
             const MiRunConfig& cfg, Rng& rng) {
  if (cfg.n == 0) throw InvalidArgument("N must be >= 1");
  if (cfg.stopping) cfg.stopping->validate();
  MiAccumulator acc(scorer, cfg);
  const ArmSampler first_sampler(chain.first(), sampler_cfg);
  SteeringPool first_pool(scorer, sampler_cfg.aggregation);
  SteeringPool joint_pool(scorer, sampler_cfg.aggregation);
  bool stopped = false;
  for (std::size_t i = 0; i < cfg.n; ++i) {
    SequenceSample a1 = first_sampler.sample_sequence(first_pool, rng);
    first_pool.add(a1.sequence.text);

    const auto follow = chain.second(a1.sequence);
    const JointTextModel joint_model(*follow, a1.sequence.text, cfg.cluster.delimiter);
    const ArmSampler second_sampler(joint_model, sampler_cfg);
    SequenceSample a2 = second_sampler.sample_sequence(joint_pool, rng);
    joint_pool.add(a2.sequence.text);
    a2.sequence.text = follow->decode(a2.sequence.tokens);

    acc.add(SamplePair::make(std::move(a1), std::move(a2)));
    if (cfg.stopping && i + 1 < cfg.n && should_stop(acc.history(), acc.ess_ratio(), *cfg.stopping)) {
      stopped = true;
      break;
    }
  }
  return acc.finish(stopped);
}

MiRun estimate_mi(std::vector<SamplePair> pairs, const SimilarityScorer& scorer, const MiRunConfig& cfg) {
  if (pairs.empty()) throw InvalidArgument("empty sample set");
  MiAccumulator acc(scorer, cfg);
  for (auto& p : pairs) acc.add(std::move(p));
  return acc.finish(false);
}

}  // namespace semsteer
