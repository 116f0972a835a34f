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

#include "semsteer/remote.hpp"

#include <cmath>
#include <thread>

#include "httplib.h"
#include "semsteer/error.hpp"

namespace semsteer {

using nlohmann::json;

Endpoint Endpoint::parse(std::string_view url) {
  constexpr std::string_view scheme = "http://";
  if (url.substr(0, scheme.size()) != scheme) throw InvalidArgument("only http:// endpoints are supported: " + std::string(url));
  std::string_view rest = url.substr(scheme.size());
  Endpoint e;
  const auto slash = rest.find('/');
  std::string_view authority = rest.substr(0, slash);
  if (slash != std::string_view::npos) e.base_path = std::string(rest.substr(slash));
  while (!e.base_path.empty() && e.base_path.back() == '/') e.base_path.pop_back();
  const auto colon = authority.rfind(':');
  if (colon != std::string_view::npos) {
    try {
      e.port = std::stoi(std::string(authority.substr(colon + 1)));
    } catch (const std::exception&) {
      throw InvalidArgument("bad port in endpoint: " + std::string(url));
    }
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) throw InvalidArgument("missing host in endpoint: " + std::string(url));
  e.host = std::string(authority);
  return e;
}

HttpTransport::HttpTransport(std::string_view url, HttpConfig config)
    : endpoint_(Endpoint::parse(url)), config_(std::move(config)) {
  if (config_.max_retries < 0) throw InvalidArgument("max_retries must be >= 0");
  if (config_.timeout.count() <= 0) throw InvalidArgument("timeout must be positive");
}

json HttpTransport::post_json(std::string_view path, const json& body) const {
  const std::string full = endpoint_.base_path + std::string(path);
  const std::string payload = body.dump();
  auto delay = config_.backoff;
  std::string last_error;
  for (int attempt = 0;; ++attempt) {
    httplib::Client client(endpoint_.host, endpoint_.port);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    httplib::Headers headers;
    if (!config_.bearer_token.empty()) headers.emplace("Authorization", "Bearer " + config_.bearer_token);
    const auto res = client.Post(full, headers, payload, "application/json");
    if (res && res->status >= 200 && res->status < 300) {
      try {
        return json::parse(res->body);
      } catch (const json::exception& e) {
        throw ProtocolError("malformed response from " + full + ": " + e.what());
      }
    }
    if (res && res->status < 500) {
      throw ProtocolError("request to " + full + " rejected with status " + std::to_string(res->status));
    }
    last_error = res ? "status " + std::to_string(res->status) : httplib::to_string(res.error());
    if (attempt >= config_.max_retries) break;
    ++retries_;
    std::this_thread::sleep_for(delay);
    delay = std::chrono::milliseconds(
        static_cast<std::chrono::milliseconds::rep>(std::ceil(static_cast<double>(delay.count()) * config_.backoff_factor)));
  }
  throw TransportError("request to " + endpoint_.host + ":" + std::to_string(endpoint_.port) + full + " failed after " +
                       std::to_string(config_.max_retries) + " retries: " + last_error);
}

RemoteArmModel::RemoteArmModel(std::shared_ptr<const HttpTransport> transport, RemoteArmConfig config)
    : transport_(std::move(transport)), config_(std::move(config)) {
  if (config_.top_k == 0) throw InvalidArgument("top_k must be >= 1");
}

SparseLogits RemoteArmModel::next_token_logits(std::span<const TokenId> prefix) const {
  const json request = {{"prefix_text", config_.prompt + raw_decode(prefix)},
                        {"prefix_ids", std::vector<TokenId>(prefix.begin(), prefix.end())},
                        {"top_k", config_.top_k}};
  const json response = transport_->post_json("/v1/logits", request);
  SparseLogits out;
  out.normalized = true;
  std::vector<std::string> decoded;
  try {
    out.ids = response.at("ids").get<std::vector<TokenId>>();
    out.values = response.at("logprobs").get<std::vector<double>>();
    decoded = response.at("decoded").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed logits payload: ") + e.what());
  }
  if (out.ids.size() != config_.top_k || out.values.size() != config_.top_k || decoded.size() != config_.top_k) {
    throw ProtocolError("logits payload has " + std::to_string(out.ids.size()) + " entries, requested top_k=" +
                        std::to_string(config_.top_k));
  }
  for (const double v : out.values) {
    if (!std::isfinite(v) || v > 1e-9) throw ProtocolError("logprob outside (-inf, 0]");
  }
  std::lock_guard lock(mu_);
  for (std::size_t i = 0; i < out.ids.size(); ++i) pieces_.emplace(out.ids[i], decoded[i]);
  return out;
}

std::string RemoteArmModel::raw_decode(std::span<const TokenId> tokens) const {
  std::string out;
  std::lock_guard lock(mu_);
  for (const TokenId t : tokens) {
    if (t == config_.eos_id) continue;
    const auto it = pieces_.find(t);
    if (it == pieces_.end()) throw ProtocolError("no decoded piece for token " + std::to_string(t));
    out += it->second;
  }
  return out;
}

std::string RemoteArmModel::decode(std::span<const TokenId> tokens) const {
  const std::string raw = raw_decode(tokens);
  const auto b = raw.find_first_not_of(" \t\n\r");
  if (b == std::string::npos) return {};
  const auto e = raw.find_last_not_of(" \t\n\r");
  return raw.substr(b, e - b + 1);
}

RemoteNliClient::RemoteNliClient(std::shared_ptr<const HttpTransport> transport, PartialMarking marking,
                                 std::size_t max_batch)
    : transport_(std::move(transport)), marking_(marking), max_batch_(max_batch) {
  if (max_batch_ == 0 || max_batch_ > 256) throw InvalidArgument("max_batch must be in [1, 256]");
}

std::vector<NliProbs> RemoteNliClient::classify_batch(std::span<const NliPair> pairs) const {
  std::vector<NliProbs> out;
  out.reserve(pairs.size());
  for (std::size_t start = 0; start < pairs.size(); start += max_batch_) {
    const auto chunk = pairs.subspan(start, std::min(max_batch_, pairs.size() - start));
    json items = json::array();
    for (const auto& p : chunk) items.push_back({{"premise", p.premise}, {"hypothesis", p.hypothesis}});
    const json response =
        transport_->post_json("/v1/entailment", {{"pairs", items}, {"marking", std::string(to_string(marking_))}});
    std::vector<std::vector<double>> rows;
    try {
      rows = response.at("probs").get<std::vector<std::vector<double>>>();
    } catch (const json::exception& e) {
      throw ProtocolError(std::string("malformed entailment payload: ") + e.what());
    }
    if (rows.size() != chunk.size()) throw ProtocolError("entailment payload has the wrong number of rows");
    for (const auto& row : rows) {
      if (row.size() != 3) throw ProtocolError("entailment row must have three classes");
      double sum = 0.0;
      for (const double v : row) {
        if (!(v >= 0.0 && v <= 1.0)) throw ProtocolError("entailment probability outside [0, 1]");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-6) throw ProtocolError("entailment probabilities do not sum to 1");
      out.push_back({row[0], row[1], row[2]});
    }
  }
  return out;
}

NliProbs remote_entailment(const RemoteNliClient& client, const std::string& premise, const std::string& hypothesis) {
  const NliPair pair{mark_partial(premise, client.marking(), false), hypothesis};
  return client.classify_batch(std::span<const NliPair>(&pair, 1)).front();
}

std::string fill_template(std::string_view tmpl, const std::unordered_map<std::string, std::string>& slots) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i);
      if (close != std::string_view::npos) {
        const std::string key(tmpl.substr(i + 1, close - i - 1));
        if (const auto it = slots.find(key); it != slots.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

RemoteArmChain::RemoteArmChain(std::shared_ptr<const HttpTransport> transport, RemoteArmConfig first,
                               std::string second_template, std::unordered_map<std::string, std::string> slots)
    : transport_(transport), first_(transport, std::move(first)), second_template_(std::move(second_template)),
      slots_(std::move(slots)) {}

std::shared_ptr<const ArmModel> RemoteArmChain::second(const Sequence& first_answer) const {
  auto slots = slots_;
  slots["first_answer"] = first_answer.text;
  RemoteArmConfig cfg = first_.config();
  cfg.prompt = fill_template(second_template_, slots);
  return std::make_shared<RemoteArmModel>(transport_, std::move(cfg));
}

}  // namespace semsteer
