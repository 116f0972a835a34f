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

#ifndef SEMSTEER_MODELS_HPP
#define SEMSTEER_MODELS_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "semsteer/domain.hpp"

namespace semsteer {

/// Sparse next-token scores. When `normalized` is false the values are raw
/// logits over a support that covers the whole vocabulary (dense); when true
/// they are already log-probabilities normalized over the full vocabulary,
/// of which only the listed ids were returned (remote top-k responses).
struct SparseLogits {
  std::vector<TokenId> ids;
  std::vector<double> values;
  bool normalized = false;
};

/// Base-model log-probabilities for the listed ids plus the entropy of the
/// full conditional (NaN when only a partial support is known).
struct BaseDistribution {
  std::vector<TokenId> ids;
  std::vector<double> logp;
  double entropy = 0.0;
};

BaseDistribution to_base_distribution(const SparseLogits& logits);

/// Autoregressive model: next-token conditionals given a generated prefix.
/// Implementations must be callable concurrently for distinct prefixes.
class ArmModel {
 public:
  virtual ~ArmModel() = default;
  virtual SparseLogits next_token_logits(std::span<const TokenId> prefix) const = 0;
  virtual TokenId eos_id() const = 0;
  virtual std::string decode(std::span<const TokenId> tokens) const = 0;
};

/// Masked-diffusion model: per-position denoising conditionals and a
/// model-owned unmasking schedule.
class MdmModel {
 public:
  virtual ~MdmModel() = default;
  virtual std::size_t length() const = 0;
  virtual TokenId mask_id() const = 0;
  virtual SparseLogits denoise_logits(std::span<const TokenId> state, std::size_t position) const = 0;
  /// Positions to fill at this step; with one step remaining every masked
  /// position must be returned.
  virtual std::vector<std::size_t> schedule(std::span<const TokenId> state, int steps_remaining, Rng& rng) const = 0;
  virtual std::string decode(std::span<const TokenId> tokens) const = 0;
};

enum class ScheduleOrder { kLeftToRight, kRandom };

/// Number of positions to unmask when `masked` remain over `steps_remaining` steps.
std::size_t fills_this_step(std::size_t masked, int steps_remaining);

/// Masked positions of `state` in ascending order.
std::vector<std::size_t> masked_positions(std::span<const TokenId> state, TokenId mask);

/// Default schedule shared by synthetic and remote MDMs. Random order draws
/// a uniform subset; the returned positions are always ascending.
std::vector<std::size_t> select_positions(std::span<const TokenId> state, TokenId mask, int steps_remaining,
                                          ScheduleOrder order, Rng& rng);

}  // namespace semsteer

#endif  // SEMSTEER_MODELS_HPP
