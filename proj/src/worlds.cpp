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

#include "semsteer/worlds.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "semsteer/error.hpp"

namespace semsteer {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

LabelMask bit(int label) {
  if (label < 0 || label >= 64) throw InvalidArgument("cluster label outside [0, 64)");
  return LabelMask{1} << label;
}

bool ends_with(std::string_view text, std::string_view suffix) {
  return text.size() >= suffix.size() && text.substr(text.size() - suffix.size()) == suffix;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  return s;
}

std::vector<TokenId> encode_or_throw(const Vocab& vocab, std::string_view text, std::string_view original) {
  try {
    return vocab.encode(text);
  } catch (const InvalidArgument& e) {
    throw ScoringError(std::string("unlabelable text: ") + e.what(), std::string(original), {});
  }
}

// Deterministic per-key normal draws used by the random worlds.
std::vector<double> keyed_normals(std::uint64_t seed, std::span<const TokenId> key, std::size_t extra,
                                  std::size_t count, double scale) {
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                                   static_cast<std::uint32_t>(extra), static_cast<std::uint32_t>(key.size())};
  for (const TokenId t : key) words.push_back(static_cast<std::uint32_t>(t));
  std::seed_seq seq(words.begin(), words.end());
  std::mt19937_64 gen(seq);
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<double> out(count);
  for (auto& v : out) v = normal(gen);
  return out;
}

double bound_arm(std::size_t v, std::size_t l) {
  double total = 0.0;
  for (std::size_t i = 0; i <= l; ++i) total += std::pow(static_cast<double>(v), static_cast<double>(i));
  return total;
}

}  // namespace

std::string_view strip_prompt(std::string_view text, std::string_view prompt) {
  if (prompt.empty()) return text;
  if (text.substr(0, prompt.size()) == prompt) {
    text.remove_prefix(prompt.size());
    if (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  }
  return text;
}

double entropy_of(std::span<const double> probs) {
  double h = 0.0;
  for (const double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

// ---------------------------------------------------------------------------
// ArmWorld

ArmWorld::ArmWorld(Vocab vocab, std::size_t max_length, ArmConditional conditional, SequenceLabel label,
                   std::size_t n_clusters, std::string prompt)
    : vocab_(std::move(vocab)),
      max_length_(max_length),
      conditional_(std::move(conditional)),
      label_(std::move(label)),
      n_clusters_(n_clusters),
      prompt_(std::move(prompt)) {
  if (max_length_ == 0) throw InvalidArgument("max_length must be at least 1");
  if (n_clusters_ == 0 || n_clusters_ > 64) throw InvalidArgument("n_clusters must be in [1, 64]");
  support_.push_back(vocab_.reserved().eos);
  for (const TokenId id : vocab_.content_ids()) support_.push_back(id);
  const double bound = bound_arm(support_.size() - 1, max_length_);
  if (bound > kEnumerationLimit) {
    throw EnumerationError("world has up to " + std::to_string(static_cast<long long>(bound)) +
                               " prefixes, above the enumeration limit",
                           bound);
  }
  build();
}

void ArmWorld::build() {
  // Depth-first walk over reachable prefixes.
  struct Frame {
    std::vector<TokenId> prefix;
    double logp;
  };
  std::vector<Frame> stack{{{}, 0.0}};
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    std::vector<double> logits;
    if (f.prefix.size() >= max_length_) {
      logits.assign(support_.size(), kNegInf);
      logits[0] = 0.0;
    } else {
      logits = conditional_(f.prefix);
      if (logits.size() != support_.size()) throw InvalidArgument("conditional returned the wrong number of logits");
      if (f.prefix.empty()) logits[0] = kNegInf;  // answers are never empty
    }
    const auto lp = log_softmax(logits);
    table_[f.prefix] = logits;
    for (std::size_t i = 0; i < support_.size(); ++i) {
      if (lp[i] == kNegInf) continue;
      auto next = f.prefix;
      next.push_back(support_[i]);
      if (i == 0) {
        distribution_[next] = std::exp(f.logp + lp[i]);
      } else {
        stack.push_back({std::move(next), f.logp + lp[i]});
      }
    }
  }
  for (const auto& [seq, p] : distribution_) {
    std::vector<TokenId> body(seq.begin(), seq.end() - 1);
    const int c = label_(body);
    if (c < 0 || static_cast<std::size_t>(c) >= n_clusters_) throw InvalidArgument("label outside [0, n_clusters)");
    complete_labels_[body] = c;
    for (std::size_t k = 0; k <= body.size(); ++k) {
      prefix_labels_[std::vector<TokenId>(body.begin(), body.begin() + static_cast<std::ptrdiff_t>(k))] |= bit(c);
    }
  }
}

SparseLogits ArmWorld::next_token_logits(std::span<const TokenId> prefix) const {
  SparseLogits out;
  out.ids = support_;
  const auto it = table_.find(std::vector<TokenId>(prefix.begin(), prefix.end()));
  if (it != table_.end()) {
    out.values = it->second;
  } else if (prefix.size() >= max_length_) {
    out.values.assign(support_.size(), kNegInf);
    out.values[0] = 0.0;
  } else {
    out.values = conditional_(prefix);
    if (prefix.empty()) out.values[0] = kNegInf;
  }
  return out;
}

int ArmWorld::label(std::span<const TokenId> tokens) const {
  if (!tokens.empty() && tokens.back() == eos_id()) tokens = tokens.first(tokens.size() - 1);
  return label_(tokens);
}

LabelMask ArmWorld::consistent_labels(std::string_view text) const {
  std::string_view body = trim(strip_prompt(text, prompt_));
  bool marked = false;
  if (ends_with(body, kTruncMarker)) {
    marked = true;
    body = trim(body.substr(0, body.size() - kTruncMarker.size()));
  }
  const auto tokens = encode_or_throw(vocab_, body, text);
  if (!marked) {
    const auto it = complete_labels_.find(tokens);
    if (it != complete_labels_.end()) return bit(it->second);
  }
  const auto it = prefix_labels_.find(tokens);
  if (it == prefix_labels_.end()) throw ScoringError("text is not reachable in this world", std::string(text), {});
  return it->second;
}

// ---------------------------------------------------------------------------
// MdmWorld

MdmWorld::MdmWorld(Vocab vocab, std::size_t length, MdmConditional conditional, SequenceLabel label,
                   std::size_t n_clusters, ScheduleOrder order, std::string prompt)
    : vocab_(std::move(vocab)),
      length_(length),
      conditional_(std::move(conditional)),
      label_(std::move(label)),
      n_clusters_(n_clusters),
      order_(order),
      prompt_(std::move(prompt)),
      content_(vocab_.content_ids()) {
  if (length_ == 0) throw InvalidArgument("length must be at least 1");
  if (n_clusters_ == 0 || n_clusters_ > 64) throw InvalidArgument("n_clusters must be in [1, 64]");
  const double bound = std::pow(static_cast<double>(content_.size() + 1), static_cast<double>(length_));
  if (bound > kEnumerationLimit) {
    throw EnumerationError("world has up to " + std::to_string(static_cast<long long>(bound)) +
                               " partial states, above the enumeration limit",
                           bound);
  }
  support_marginal_ = trajectory_marginal(static_cast<int>(length_));
}

SparseLogits MdmWorld::denoise_logits(std::span<const TokenId> state, std::size_t position) const {
  if (position >= length_ || state.size() != length_) throw InvalidArgument("position outside state");
  if (state[position] != mask_id()) throw InvalidArgument("position is not masked");
  SparseLogits out;
  out.ids = content_;
  out.values = conditional_(state, position);
  if (out.values.size() != content_.size()) throw InvalidArgument("conditional returned the wrong number of logits");
  return out;
}

std::vector<std::size_t> MdmWorld::schedule(std::span<const TokenId> state, int steps_remaining, Rng& rng) const {
  return select_positions(state, mask_id(), steps_remaining, order_, rng);
}

std::map<std::vector<TokenId>, double> MdmWorld::trajectory_marginal(int steps) const {
  if (steps < 1) throw InvalidArgument("steps must be at least 1");
  std::map<std::vector<TokenId>, double> out;
  const TokenId mask = mask_id();

  std::function<void(std::vector<TokenId>&, int, double)> walk = [&](std::vector<TokenId>& state, int remaining,
                                                                     double prob) {
    auto masked = masked_positions(state, mask);
    if (masked.empty()) {
      out[state] += prob;
      return;
    }
    if (remaining < 1) throw InvalidArgument("schedule left masked positions");
    const std::size_t k = fills_this_step(masked.size(), remaining);
    std::vector<std::vector<std::size_t>> subsets;
    if (order_ == ScheduleOrder::kLeftToRight || k == masked.size()) {
      subsets.emplace_back(masked.begin(), masked.begin() + static_cast<std::ptrdiff_t>(k));
    } else {
      std::vector<bool> pick(masked.size(), false);
      std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(k), true);
      do {
        std::vector<std::size_t> s;
        for (std::size_t i = 0; i < masked.size(); ++i) {
          if (pick[i]) s.push_back(masked[i]);
        }
        subsets.push_back(std::move(s));
      } while (std::prev_permutation(pick.begin(), pick.end()));
    }
    const double subset_prob = 1.0 / static_cast<double>(subsets.size());
    for (const auto& subset : subsets) {
      // Every position in the subset conditions on the same pre-step state.
      std::vector<std::vector<double>> lps;
      for (const std::size_t pos : subset) {
        lps.push_back(log_softmax(conditional_(state, pos)));
      }
      std::vector<std::size_t> idx(subset.size(), 0);
      while (true) {
        double lp = 0.0;
        for (std::size_t j = 0; j < subset.size(); ++j) lp += lps[j][idx[j]];
        if (lp != kNegInf) {
          auto next = state;
          for (std::size_t j = 0; j < subset.size(); ++j) next[subset[j]] = content_[idx[j]];
          walk(next, remaining - 1, prob * subset_prob * std::exp(lp));
        }
        std::size_t j = 0;
        while (j < idx.size() && ++idx[j] == content_.size()) idx[j++] = 0;
        if (j == idx.size()) break;
      }
    }
  };
  std::vector<TokenId> start(length_, mask);
  walk(start, steps, 1.0);
  return out;
}

LabelMask MdmWorld::consistent_labels(std::string_view text) const {
  const std::string_view body = trim(strip_prompt(text, prompt_));
  const auto tokens = encode_or_throw(vocab_, body, text);
  if (tokens.size() != length_) throw ScoringError("text length does not match the world", std::string(text), {});
  LabelMask mask = 0;
  for (const auto& [seq, p] : support_marginal_) {
    if (p <= 0.0) continue;
    bool match = true;
    for (std::size_t i = 0; i < length_ && match; ++i) {
      match = tokens[i] == mask_id() || tokens[i] == seq[i];
    }
    if (match) mask |= bit(label_(seq));
  }
  if (mask == 0) throw ScoringError("text is not reachable in this world", std::string(text), {});
  return mask;
}

// ---------------------------------------------------------------------------
// PairWorld

PairWorld::PairWorld(std::shared_ptr<const ArmWorld> first, SecondFactory second, std::string delimiter,
                     std::string prompt)
    : first_(std::move(first)),
      factory_(std::move(second)),
      delimiter_(std::move(delimiter)),
      prompt_(std::move(prompt)),
      k1_(first_->n_clusters()),
      k2_(0) {
  for (const auto& [seq, p] : first_->distribution()) {
    const auto w = second_world(std::span<const TokenId>(seq).first(seq.size() - 1));
    if (k2_ == 0) k2_ = w->n_clusters();
    if (w->n_clusters() != k2_) throw InvalidArgument("second-answer worlds disagree on the cluster count");
  }
  if (k1_ * k2_ + k1_ + k2_ > 64) throw InvalidArgument("pair world has too many joint clusters");
}

std::shared_ptr<const ArmWorld> PairWorld::second_world(std::span<const TokenId> first_tokens) const {
  std::vector<TokenId> key(first_tokens.begin(), first_tokens.end());
  if (!key.empty() && key.back() == first_->eos_id()) key.pop_back();
  std::lock_guard lock(mu_);
  auto& slot = cache_[key];
  if (!slot) slot = factory_(key);
  return slot;
}

std::shared_ptr<const ArmModel> PairWorld::second(const Sequence& first_answer) const {
  return second_world(first_answer.tokens);
}

LabelMask PairWorld::consistent_labels(std::string_view text) const {
  const std::string_view body = trim(strip_prompt(text, prompt_));
  const std::string sep = " " + delimiter_ + " ";
  const std::string lead = delimiter_ + " ";
  if (body.substr(0, lead.size()) == lead) {
    // Second answer on its own: labels live above the first-answer range.
    return second_labels(trim(body.substr(lead.size()))) << (k1_ * k2_ + k1_);
  }
  const auto cut = body.find(sep);
  if (cut == std::string_view::npos) {
    // First-answer text on its own: labels live above the joint range.
    const std::string_view lone = ends_with(body, delimiter_) ? trim(body.substr(0, body.size() - delimiter_.size()))
                                                              : body;
    return first_->consistent_labels(lone) << (k1_ * k2_);
  }
  const std::string_view a1 = trim(body.substr(0, cut));
  const std::string_view a2 = trim(body.substr(cut + sep.size()));
  const LabelMask m1 = first_->consistent_labels(a1);
  if (std::popcount(m1) != 1) throw ScoringError("first answer of a pair must be complete", std::string(text), {});
  const auto first_tokens = first_->vocab().encode(a1);
  const auto w2 = second_world(first_tokens);
  const LabelMask m2 = w2->consistent_labels(a2);
  const int l1 = std::countr_zero(m1);
  LabelMask joint = 0;
  for (std::size_t l2 = 0; l2 < k2_; ++l2) {
    if (m2 & (LabelMask{1} << l2)) joint |= LabelMask{1} << (static_cast<std::size_t>(l1) * k2_ + l2);
  }
  return joint;
}

LabelMask PairWorld::second_labels(std::string_view answer) const {
  const std::string key(answer);
  {
    std::lock_guard lock(mu_);
    if (const auto it = lone_second_.find(key); it != lone_second_.end()) return it->second;
  }
  LabelMask mask = 0;
  for (const auto& [s1, p1] : first_->distribution()) {
    const auto w2 = second_world(std::span<const TokenId>(s1).first(s1.size() - 1));
    try {
      mask |= w2->consistent_labels(answer);
    } catch (const ScoringError&) {
    }
  }
  if (mask == 0) throw ScoringError("second answer is not reachable", key, {});
  std::lock_guard lock(mu_);
  lone_second_[key] = mask;
  return mask;
}

std::vector<double> PairWorld::exact_joint_cluster_probs() const {
  std::vector<double> probs(k1_ * k2_, 0.0);
  for (const auto& [s1, p1] : first_->distribution()) {
    const std::span<const TokenId> body1 = std::span<const TokenId>(s1).first(s1.size() - 1);
    const int l1 = first_->label(body1);
    const auto w2 = second_world(body1);
    for (const auto& [s2, p2] : w2->distribution()) {
      probs[static_cast<std::size_t>(l1) * k2_ + static_cast<std::size_t>(w2->label(s2))] += p1 * p2;
    }
  }
  return probs;
}

double PairWorld::exact_mutual_information() const {
  const auto joint = exact_joint_cluster_probs();
  std::vector<double> m1(k1_, 0.0);
  std::vector<double> m2(k2_, 0.0);
  for (std::size_t a = 0; a < k1_; ++a) {
    for (std::size_t b = 0; b < k2_; ++b) {
      m1[a] += joint[a * k2_ + b];
      m2[b] += joint[a * k2_ + b];
    }
  }
  double mi = 0.0;
  for (std::size_t a = 0; a < k1_; ++a) {
    for (std::size_t b = 0; b < k2_; ++b) {
      const double p = joint[a * k2_ + b];
      if (p > 0.0) mi += p * std::log(p / (m1[a] * m2[b]));
    }
  }
  return mi;
}

// ---------------------------------------------------------------------------
// Enumeration

std::map<std::vector<TokenId>, double> enumerate_distribution(const ArmWorld& world) {
  return world.distribution();
}

std::map<std::vector<TokenId>, double> enumerate_distribution(const MdmWorld& world, int steps) {
  return world.trajectory_marginal(steps);
}

std::vector<double> exact_cluster_probs(const ArmWorld& world) {
  std::vector<double> probs(world.n_clusters(), 0.0);
  for (const auto& [seq, p] : world.distribution()) probs[static_cast<std::size_t>(world.label(seq))] += p;
  return probs;
}

std::vector<double> exact_cluster_probs(const MdmWorld& world, int steps) {
  std::vector<double> probs(world.n_clusters(), 0.0);
  for (const auto& [seq, p] : world.trajectory_marginal(steps)) {
    probs[static_cast<std::size_t>(world.label(seq))] += p;
  }
  return probs;
}

double exact_logprob_cluster_correlation(const ArmWorld& world) {
  const auto pc = exact_cluster_probs(world);
  double ex = 0, ey = 0, exx = 0, eyy = 0, exy = 0;
  for (const auto& [seq, p] : world.distribution()) {
    const double x = -std::log(p);
    const double y = -std::log(pc[static_cast<std::size_t>(world.label(seq))]);
    ex += p * x;
    ey += p * y;
    exx += p * x * x;
    eyy += p * y * y;
    exy += p * x * y;
  }
  const double vx = exx - ex * ex;
  const double vy = eyy - ey * ey;
  if (vx <= 0.0 || vy <= 0.0) return 0.0;
  return (exy - ex * ey) / std::sqrt(vx * vy);
}

// ---------------------------------------------------------------------------
// Builders

namespace {

std::vector<std::string> letter_pieces(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(i < 26 ? std::string(1, static_cast<char>('a' + i)) : "t" + std::to_string(i));
  }
  return out;
}

std::vector<double> log_probs_of(const std::vector<double>& probs) {
  std::vector<double> out;
  for (const double p : probs) {
    if (p < 0.0) throw InvalidArgument("negative probability");
    out.push_back(p > 0.0 ? std::log(p) : kNegInf);
  }
  return out;
}

}  // namespace

std::shared_ptr<ArmWorld> make_random_arm_world(const RandomArmParams& params) {
  if (params.vocab == 0 || params.vocab > 16) throw InvalidArgument("random world vocab must be in [1, 16]");
  if (params.max_length > 6) throw InvalidArgument("random world length must be at most 6");
  if (params.clusters == 0 || params.clusters > params.vocab) {
    throw InvalidArgument("random world needs 1 <= clusters <= vocab");
  }
  auto vocab = Vocab::with_content(letter_pieces(params.vocab));
  const TokenId first_content = vocab.content_ids().front();
  // Token-to-cluster map: round robin, then shuffled by the seed.
  std::vector<int> cluster_of(params.vocab);
  for (std::size_t i = 0; i < params.vocab; ++i) cluster_of[i] = static_cast<int>(i % params.clusters);
  {
    std::mt19937_64 gen(params.seed ^ 0x9e3779b97f4a7c15ULL);
    std::shuffle(cluster_of.begin(), cluster_of.end(), gen);
  }
  const auto seed = params.seed;
  const auto scale = params.logit_scale;
  const auto eos_bias = params.eos_bias;
  const auto n = params.vocab;
  ArmConditional cond = [seed, scale, eos_bias, n](std::span<const TokenId> prefix) {
    auto v = keyed_normals(seed, prefix, 0, n + 1, scale);
    if (!prefix.empty()) v[0] += eos_bias;
    return v;
  };
  const auto pos = params.label_position;
  SequenceLabel label = [cluster_of, pos, first_content](std::span<const TokenId> tokens) {
    if (tokens.empty()) return 0;
    const std::size_t at = std::min(pos, tokens.size() - 1);
    return cluster_of[static_cast<std::size_t>(tokens[at] - first_content)];
  };
  return std::make_shared<ArmWorld>(std::move(vocab), params.max_length, std::move(cond), std::move(label),
                                    params.clusters);
}

std::shared_ptr<MdmWorld> make_random_mdm_world(const RandomMdmParams& params) {
  if (params.vocab == 0 || params.vocab > 16) throw InvalidArgument("random world vocab must be in [1, 16]");
  if (params.length == 0 || params.length > 6) throw InvalidArgument("random world length must be in [1, 6]");
  if (params.clusters == 0 || params.clusters > params.vocab) {
    throw InvalidArgument("random world needs 1 <= clusters <= vocab");
  }
  if (params.label_position >= params.length) throw InvalidArgument("label position outside the sequence");
  auto vocab = Vocab::with_content(letter_pieces(params.vocab));
  const TokenId first_content = vocab.content_ids().front();
  std::vector<int> cluster_of(params.vocab);
  for (std::size_t i = 0; i < params.vocab; ++i) cluster_of[i] = static_cast<int>(i % params.clusters);
  {
    std::mt19937_64 gen(params.seed ^ 0x9e3779b97f4a7c15ULL);
    std::shuffle(cluster_of.begin(), cluster_of.end(), gen);
  }
  const auto seed = params.seed;
  const auto scale = params.logit_scale;
  const auto n = params.vocab;
  MdmConditional cond = [seed, scale, n](std::span<const TokenId> state, std::size_t position) {
    return keyed_normals(seed, state, position + 1, n, scale);
  };
  const auto pos = params.label_position;
  SequenceLabel label = [cluster_of, pos, first_content](std::span<const TokenId> tokens) {
    return cluster_of[static_cast<std::size_t>(tokens[pos] - first_content)];
  };
  return std::make_shared<MdmWorld>(std::move(vocab), params.length, std::move(cond), std::move(label),
                                    params.clusters, params.order);
}

std::shared_ptr<ArmWorld> make_opener_world(const std::vector<double>& cluster_probs, std::string prompt) {
  const std::size_t k = cluster_probs.size();
  if (k == 0 || k > 12) throw InvalidArgument("opener world supports 1..12 clusters");
  std::vector<std::string> pieces{"well", "so", "the", "a"};
  for (std::size_t c = 0; c < k; ++c) pieces.push_back("c" + std::to_string(c));
  auto vocab = Vocab::with_content(pieces);
  const auto ids = vocab.content_ids();
  const std::size_t width = ids.size() + 1;
  const auto answer_logits = log_probs_of(cluster_probs);
  // Support layout: [EOS, well, so, the, a, c0, c1, ...].
  ArmConditional cond = [width, answer_logits](std::span<const TokenId> prefix) {
    std::vector<double> v(width, kNegInf);
    switch (prefix.size()) {
      case 0:
        v[1] = std::log(0.6);
        v[2] = std::log(0.4);
        break;
      case 1:
        v[3] = std::log(0.5);
        v[4] = std::log(0.5);
        break;
      case 2:
        for (std::size_t c = 0; c < answer_logits.size(); ++c) v[5 + c] = answer_logits[c];
        break;
      default:
        v[0] = 0.0;
    }
    return v;
  };
  const TokenId c0 = ids[4];
  SequenceLabel label = [c0](std::span<const TokenId> tokens) {
    if (tokens.size() < 3) return 0;
    return static_cast<int>(tokens[2] - c0);
  };
  return std::make_shared<ArmWorld>(std::move(vocab), 3, std::move(cond), std::move(label), k, std::move(prompt));
}

std::shared_ptr<ArmWorld> make_categorical_world(const std::vector<double>& cluster_probs, std::string prompt) {
  const std::size_t k = cluster_probs.size();
  if (k == 0 || k > 16) throw InvalidArgument("categorical world supports 1..16 clusters");
  std::vector<std::string> pieces;
  for (std::size_t c = 0; c < k; ++c) pieces.push_back("c" + std::to_string(c));
  auto vocab = Vocab::with_content(pieces);
  const TokenId c0 = vocab.content_ids().front();
  const auto logits = log_probs_of(cluster_probs);
  ArmConditional cond = [logits](std::span<const TokenId>) {
    std::vector<double> v{kNegInf};
    v.insert(v.end(), logits.begin(), logits.end());
    return v;
  };
  SequenceLabel label = [c0](std::span<const TokenId> tokens) {
    return tokens.empty() ? 0 : static_cast<int>(tokens[0] - c0);
  };
  return std::make_shared<ArmWorld>(std::move(vocab), 1, std::move(cond), std::move(label), k, std::move(prompt));
}

std::shared_ptr<ArmWorld> make_point_mass_world(std::size_t length) {
  auto vocab = Vocab::with_content({"x", "y"});
  const std::size_t width = 3;
  ArmConditional cond = [width, length](std::span<const TokenId> prefix) {
    std::vector<double> v(width, kNegInf);
    v[prefix.size() < length ? 1 : 0] = 0.0;
    return v;
  };
  SequenceLabel label = [](std::span<const TokenId>) { return 0; };
  return std::make_shared<ArmWorld>(std::move(vocab), length, std::move(cond), std::move(label), 1);
}

std::shared_ptr<PairWorld> make_copy_pair_world(std::shared_ptr<const ArmWorld> first) {
  auto factory = [first](std::span<const TokenId> answer) -> std::shared_ptr<const ArmWorld> {
    std::vector<TokenId> target(answer.begin(), answer.end());
    const auto& support = first->support();
    ArmConditional cond = [target, support](std::span<const TokenId> prefix) {
      std::vector<double> v(support.size(), kNegInf);
      if (prefix.size() >= target.size()) {
        v[0] = 0.0;
      } else {
        const auto it = std::find(support.begin(), support.end(), target[prefix.size()]);
        v[static_cast<std::size_t>(it - support.begin())] = 0.0;
      }
      return v;
    };
    SequenceLabel label = [first](std::span<const TokenId> tokens) { return first->label(tokens); };
    return std::make_shared<ArmWorld>(first->vocab(), std::max<std::size_t>(target.size(), 1), std::move(cond),
                                      std::move(label), first->n_clusters());
  };
  return std::make_shared<PairWorld>(first, std::move(factory), "||", first->prompt());
}

std::shared_ptr<PairWorld> make_independent_pair_world(std::shared_ptr<const ArmWorld> first,
                                                       std::shared_ptr<const ArmWorld> second) {
  auto factory = [second](std::span<const TokenId>) { return second; };
  return std::make_shared<PairWorld>(first, std::move(factory), "||", first->prompt());
}

}  // namespace semsteer
