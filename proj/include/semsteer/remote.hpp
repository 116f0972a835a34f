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

#ifndef SEMSTEER_REMOTE_HPP
#define SEMSTEER_REMOTE_HPP

#include <atomic>
#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "semsteer/models.hpp"
#include "semsteer/similarity.hpp"
#include "semsteer/worlds.hpp"

namespace semsteer {

struct HttpConfig {
  std::chrono::milliseconds timeout{10000};
  int max_retries = 3;
  std::chrono::milliseconds backoff{100};
  double backoff_factor = 2.0;
  std::string bearer_token;
};

/// "http://host[:port][/base]".
struct Endpoint {
  std::string host;
  int port = 80;
  std::string base_path;

  static Endpoint parse(std::string_view url);
};

/// JSON-over-HTTP POST with a per-request timeout. Connection failures and
/// 5xx answers are retried with exponential backoff; 4xx answers and
/// malformed bodies are protocol errors.
class HttpTransport {
 public:
  HttpTransport(std::string_view url, HttpConfig config);

  nlohmann::json post_json(std::string_view path, const nlohmann::json& body) const;
  std::size_t retries() const noexcept { return retries_.load(); }
  const HttpConfig& config() const noexcept { return config_; }

 private:
  Endpoint endpoint_;
  HttpConfig config_;
  mutable std::atomic<std::size_t> retries_{0};
};

struct RemoteArmConfig {
  std::string prompt;
  std::size_t top_k = 20;
  TokenId eos_id = 0;
};

/// Next-token log-probabilities served over POST /v1/logits. The response
/// must carry exactly `top_k` entries.
class RemoteArmModel final : public ArmModel {
 public:
  RemoteArmModel(std::shared_ptr<const HttpTransport> transport, RemoteArmConfig config);

  SparseLogits next_token_logits(std::span<const TokenId> prefix) const override;
  TokenId eos_id() const override { return config_.eos_id; }
  /// Concatenates the pieces the server reported for each id, skipping EOS,
  /// and trims surrounding whitespace.
  std::string decode(std::span<const TokenId> tokens) const override;

  const RemoteArmConfig& config() const noexcept { return config_; }

 private:
  std::string raw_decode(std::span<const TokenId> tokens) const;

  std::shared_ptr<const HttpTransport> transport_;
  RemoteArmConfig config_;
  mutable std::mutex mu_;
  mutable std::unordered_map<TokenId, std::string> pieces_;
};

/// Three-class entailment over POST /v1/entailment, in chunks of at most
/// `max_batch` pairs.
class RemoteNliClient final : public SimilarityScorer {
 public:
  RemoteNliClient(std::shared_ptr<const HttpTransport> transport, PartialMarking marking,
                  std::size_t max_batch = 256);

  std::vector<NliProbs> classify_batch(std::span<const NliPair> pairs) const override;
  bool supports_partial() const override { return marking_ != PartialMarking::kNone; }
  PartialMarking marking() const noexcept { return marking_; }

 private:
  std::shared_ptr<const HttpTransport> transport_;
  PartialMarking marking_;
  std::size_t max_batch_;
};

/// One entailment call with the premise marked as unfinished per `marking`.
NliProbs remote_entailment(const RemoteNliClient& client, const std::string& premise, const std::string& hypothesis);

/// Fills "{context}", "{question}", "{prompt}" and "{first_answer}" slots.
std::string fill_template(std::string_view tmpl, const std::unordered_map<std::string, std::string>& slots);

/// Remote iterative prompting: the second answer is drawn with a prompt built
/// from `second_template` around the first answer.
class RemoteArmChain final : public ArmChain {
 public:
  RemoteArmChain(std::shared_ptr<const HttpTransport> transport, RemoteArmConfig first,
                 std::string second_template, std::unordered_map<std::string, std::string> slots);

  const ArmModel& first() const override { return first_; }
  std::shared_ptr<const ArmModel> second(const Sequence& first_answer) const override;

 private:
  std::shared_ptr<const HttpTransport> transport_;
  RemoteArmModel first_;
  std::string second_template_;
  std::unordered_map<std::string, std::string> slots_;
};

}  // namespace semsteer

#endif  // SEMSTEER_REMOTE_HPP
