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

#ifndef SEMSTEER_TESTS_REFERENCE_HPP
#define SEMSTEER_TESTS_REFERENCE_HPP

// Independent reference implementations used as test oracles. Nothing here
// calls into the arithmetic under test.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "semsteer/models.hpp"
#include "semsteer/similarity.hpp"

namespace ref {

using semsteer::TokenId;

inline std::vector<long double> softmax(std::span<const double> logits) {
  long double m = -INFINITY;
  for (const double v : logits) m = std::max<long double>(m, v);
  std::vector<long double> out(logits.size());
  long double z = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::isinf(logits[i]) ? 0.0L : std::exp(static_cast<long double>(logits[i]) - m);
    z += out[i];
  }
  for (auto& v : out) v /= z;
  return out;
}

/// Probabilities of a SparseLogits, dense or normalized.
inline std::vector<long double> probs_of(const semsteer::SparseLogits& l) {
  if (!l.normalized) return softmax(l.values);
  std::vector<long double> out;
  for (const double v : l.values) out.push_back(std::exp(static_cast<long double>(v)));
  return out;
}

inline std::vector<long double> normalize(std::span<const double> log_ratios) {
  std::vector<long double> w;
  long double z = 0;
  for (const double r : log_ratios) {
    w.push_back(std::exp(static_cast<long double>(r)));
    z += w.back();
  }
  for (auto& v : w) v /= z;
  return w;
}

/// Inverse-CDF draw with one uniform, in support order.
inline std::size_t draw(const std::vector<long double>& probs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  long double cum = 0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0) continue;
    cum += probs[i];
    last = i;
    if (u < cum) return i;
  }
  return last;
}

struct Draw {
  std::vector<TokenId> tokens;
  long double logp = 0;
};

/// Plain ancestral sampling, no steering.
inline Draw vanilla_arm(const semsteer::ArmModel& model, std::mt19937_64& rng, std::size_t max_tokens = 64) {
  Draw d;
  std::vector<TokenId> prefix;
  while (prefix.size() < max_tokens) {
    const auto l = model.next_token_logits(prefix);
    const auto p = probs_of(l);
    const std::size_t k = draw(p, rng);
    d.logp += std::log(p[k]);
    d.tokens.push_back(l.ids[k]);
    if (l.ids[k] == model.eos_id()) break;
    prefix.push_back(l.ids[k]);
  }
  return d;
}

/// Plain masked-diffusion sampling under the model's schedule.
inline Draw vanilla_mdm(const semsteer::MdmModel& model, int steps, std::mt19937_64& rng) {
  Draw d;
  std::vector<TokenId> state(model.length(), model.mask_id());
  for (int t = steps - 1; t >= 0; --t) {
    const auto positions = model.schedule(state, t + 1, rng);
    const auto before = state;
    for (const std::size_t m : positions) {
      const auto l = model.denoise_logits(before, m);
      const auto p = probs_of(l);
      const std::size_t k = draw(p, rng);
      d.logp += std::log(p[k]);
      state[m] = l.ids[k];
    }
  }
  d.tokens = state;
  return d;
}

/// Scorer answering from a table keyed by (premise, hypothesis); unknown
/// pairs get `fallback`. Counts how many pairs it has been asked about.
class TableScorer final : public semsteer::SimilarityScorer {
 public:
  std::map<std::pair<std::string, std::string>, double> entail;
  double fallback = 0.0;
  mutable std::atomic<std::size_t> calls{0};
  mutable std::atomic<std::size_t> batches{0};

  std::vector<semsteer::NliProbs> classify_batch(std::span<const semsteer::NliPair> pairs) const override {
    ++batches;
    std::vector<semsteer::NliProbs> out;
    for (const auto& p : pairs) {
      ++calls;
      const auto it = entail.find({p.premise, p.hypothesis});
      const double e = it == entail.end() ? fallback : it->second;
      out.push_back({e, (1.0 - e) / 2.0, (1.0 - e) / 2.0});
    }
    return out;
  }
};

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("semsteer_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace ref

#endif  // SEMSTEER_TESTS_REFERENCE_HPP
