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

#include "semsteer/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semsteer/error.hpp"

namespace semsteer {

BaseDistribution to_base_distribution(const SparseLogits& logits) {
  if (logits.ids.size() != logits.values.size()) throw ProtocolError("logit ids and values differ in length");
  if (logits.ids.empty()) throw ProtocolError("empty logit vector");
  BaseDistribution base;
  base.ids = logits.ids;
  if (logits.normalized) {
    base.logp = logits.values;
    for (const double lp : base.logp) {
      if (std::isnan(lp) || lp > 1e-9) throw ProtocolError("log-probability above zero or NaN");
    }
    base.entropy = std::numeric_limits<double>::quiet_NaN();
    // A response that covers the whole mass carries its own entropy.
    double mass = 0.0;
    for (const double lp : base.logp) mass += std::exp(lp);
    if (std::abs(mass - 1.0) < 1e-9) base.entropy = entropy_from_logprobs(base.logp);
  } else {
    base.logp = log_softmax(logits.values);
    base.entropy = entropy_from_logprobs(base.logp);
  }
  return base;
}

std::size_t fills_this_step(std::size_t masked, int steps_remaining) {
  if (steps_remaining <= 1) return masked;
  const auto steps = static_cast<std::size_t>(steps_remaining);
  return (masked + steps - 1) / steps;
}

std::vector<std::size_t> masked_positions(std::span<const TokenId> state, TokenId mask) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state[i] == mask) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> select_positions(std::span<const TokenId> state, TokenId mask, int steps_remaining,
                                          ScheduleOrder order, Rng& rng) {
  auto masked = masked_positions(state, mask);
  const std::size_t k = fills_this_step(masked.size(), steps_remaining);
  if (order == ScheduleOrder::kRandom && k < masked.size()) {
    // Partial Fisher-Yates over the first k slots.
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, masked.size() - 1);
      std::swap(masked[i], masked[pick(rng)]);
    }
  }
  masked.resize(k);
  std::sort(masked.begin(), masked.end());
  return masked;
}

}  // namespace semsteer
