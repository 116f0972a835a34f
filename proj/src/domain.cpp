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

#include "semsteer/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "semsteer/error.hpp"

namespace semsteer {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

Vocab Vocab::with_content(const std::vector<std::string>& content, std::string joiner) {
  Vocab v;
  v.joiner_ = std::move(joiner);
  v.pieces_ = {"<BOS>", "<EOS>", std::string(kMaskMarker), std::string(kTruncMarker)};
  v.pieces_.insert(v.pieces_.end(), content.begin(), content.end());
  for (std::size_t i = 0; i < v.pieces_.size(); ++i) {
    const auto [it, inserted] = v.index_.emplace(v.pieces_[i], static_cast<TokenId>(i));
    if (!inserted) throw InvalidArgument("duplicate vocabulary piece '" + v.pieces_[i] + "'");
  }
  return v;
}

const std::string& Vocab::piece(TokenId id) const {
  if (!contains(id)) throw InvalidArgument("token id " + std::to_string(id) + " outside vocabulary");
  return pieces_[static_cast<std::size_t>(id)];
}

bool Vocab::is_reserved(TokenId id) const noexcept {
  return id == reserved_.bos || id == reserved_.eos || id == reserved_.mask || id == reserved_.trunc;
}

std::optional<TokenId> Vocab::find(std::string_view p) const {
  const auto it = index_.find(std::string(p));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<TokenId> Vocab::content_ids() const {
  std::vector<TokenId> ids;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (!is_reserved(static_cast<TokenId>(i))) ids.push_back(static_cast<TokenId>(i));
  }
  return ids;
}

std::string Vocab::decode(std::span<const TokenId> tokens) const {
  std::string out;
  bool first = true;
  for (const TokenId t : tokens) {
    if (t == reserved_.bos || t == reserved_.eos) continue;
    if (!first) out += joiner_;
    out += piece(t);
    first = false;
  }
  return out;
}

std::vector<TokenId> Vocab::encode(std::string_view text) const {
  std::vector<TokenId> ids;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) {
    const auto id = find(word);
    if (!id) throw InvalidArgument("unknown piece '" + word + "'");
    ids.push_back(*id);
  }
  return ids;
}

double SequenceSample::entropy_compensator() const noexcept {
  double total = 0.0;
  for (const auto& s : steps) total += s.base_entropy;
  return total;
}

void finalize_sample(SequenceSample& sample) {
  sample.logp = 0.0;
  sample.logq = 0.0;
  for (const auto& s : sample.steps) {
    sample.logp += s.logp_base;
    sample.logq += s.logq_proposal;
  }
}

SamplePair SamplePair::make(SequenceSample first, SequenceSample second) {
  SamplePair p;
  p.logp_joint = first.logp + second.logp;
  p.logq_joint = first.logq + second.logq;
  p.first = std::move(first);
  p.second = std::move(second);
  return p;
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return kNegInf;
  const double m = *std::max_element(values.begin(), values.end());
  if (m == kNegInf) return kNegInf;
  if (std::isinf(m)) return m;
  double acc = 0.0;
  for (const double v : values) acc += std::exp(v - m);
  return m + std::log(acc);
}

std::vector<double> log_softmax(std::span<const double> logits) {
  const double z = log_sum_exp(logits);
  if (!std::isfinite(z)) throw InvalidArgument("log_softmax: no finite logit");
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] == kNegInf ? kNegInf : logits[i] - z;
  return out;
}

double entropy_from_logprobs(std::span<const double> logprobs) {
  double h = 0.0;
  for (const double lp : logprobs) {
    if (lp == kNegInf) continue;
    h -= std::exp(lp) * lp;
  }
  return h;
}

std::vector<double> normalize_weights(std::span<const double> log_ratios) {
  if (log_ratios.empty()) throw InvalidArgument("empty sample set");
  for (const double r : log_ratios) {
    if (!std::isfinite(r)) throw InvalidArgument("non-finite log ratio");
  }
  const double z = log_sum_exp(log_ratios);
  std::vector<double> w(log_ratios.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_ratios[i] - z);
  return w;
}

double effective_sample_size(std::span<const double> normalized_weights) {
  if (normalized_weights.empty()) throw InvalidArgument("empty sample set");
  double sum = 0.0;
  double sq = 0.0;
  for (const double w : normalized_weights) {
    if (!(w >= 0.0)) throw InvalidArgument("negative or NaN weight");
    sum += w;
    sq += w * w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument("weights are not normalized");
  return 1.0 / sq;
}

template <class Sample>
void WeightedSet<Sample>::reweight() {
  log_weights_.clear();
  log_weights_.reserve(samples_.size());
  for (const auto& s : samples_) log_weights_.push_back(s.log_weight());
  weights_.resize(log_weights_.size());
  for (std::size_t i = 0; i < weights_.size(); ++i) weights_[i] = std::exp(log_weights_[i]);
  normalized_ = samples_.empty() ? std::vector<double>{} : normalize_weights(log_weights_);
}

template class WeightedSet<SequenceSample>;
template class WeightedSet<SamplePair>;

}  // namespace semsteer
