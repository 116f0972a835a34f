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

#ifndef SEMSTEER_AUGMENT_HPP
#define SEMSTEER_AUGMENT_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "semsteer/domain.hpp"

namespace semsteer {

enum class NliLabel { kEntail, kNeutral, kContradict };

std::string_view to_string(NliLabel l);
NliLabel parse_nli_label(std::string_view s);

enum class CorruptedSide { kNone, kPremise, kHypothesis };
enum class CorruptionMode { kIntact, kTruncate, kMask };

std::string_view to_string(CorruptedSide s);
std::string_view to_string(CorruptionMode m);

/// Truncation cut (tokens kept) or masking fraction f.
struct Corruption {
  CorruptedSide side = CorruptedSide::kNone;
  CorruptionMode mode = CorruptionMode::kIntact;
  double fraction_or_cut = 0.0;
};

struct LabeledPair {
  std::string premise;
  std::string hypothesis;
  NliLabel label = NliLabel::kEntail;
  Corruption corruption;
};

std::vector<std::string> whitespace_tokens(std::string_view text);

/// The intact pair, every proper hypothesis prefix and every proper premise
/// prefix, each prefix followed by `marker`: 1 + (L_h − 1) + (L_p − 1) records.
std::vector<LabeledPair> unroll_truncations(const LabeledPair& pair, std::string_view marker = kTruncMarker);

/// The intact pair plus one prefix of a uniformly chosen side cut at a
/// uniformly drawn proper length; intact only when neither side can be cut.
std::vector<LabeledPair> sample_truncation(const LabeledPair& pair, std::string_view marker, std::uint64_t seed,
                                           std::size_t record);

/// The intact pair plus `k` variants. Each variant picks one side uniformly,
/// draws f ~ U(0,1) and replaces each token of that side with `marker` with
/// probability f. Variant j of record r uses its own stream seeded by
/// (seed, r, j).
std::vector<LabeledPair> mask_variants(const LabeledPair& pair, std::size_t k, std::string_view marker,
                                       std::uint64_t seed, std::size_t record);

}  // namespace semsteer

#endif  // SEMSTEER_AUGMENT_HPP
