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

#ifndef SEMSTEER_RECORDS_HPP
#define SEMSTEER_RECORDS_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "semsteer/augment.hpp"
#include "semsteer/domain.hpp"
#include "semsteer/error.hpp"

namespace semsteer {

inline constexpr std::string_view kRecordSchema = "semsteer/1";
inline constexpr std::string_view kConfigSchema = "semsteer-config/1";
inline constexpr std::string_view kStudySchema = "semsteer-study/1";

/// A record file that does not parse; names the file and the byte offset of
/// the offending line.
class CorruptTrace : public Error {
 public:
  CorruptTrace(const std::string& file, std::uint64_t offset, const std::string& what)
      : Error(file + " at byte " + std::to_string(offset) + ": " + what), file_(file), offset_(offset) {}
  const std::string& file() const noexcept { return file_; }
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::string file_;
  std::uint64_t offset_;
};

struct Record {
  std::uint64_t offset = 0;
  nlohmann::json value;
};

/// Reads one JSON value per non-blank line.
std::vector<Record> read_jsonl(const std::filesystem::path& path);

/// Opens a new file for writing; refuses to overwrite an existing one.
std::ofstream create_output(const std::filesystem::path& path);

nlohmann::json to_json(const TokenStep& step, Origin origin);
nlohmann::json to_json(const SequenceSample& sample);
SequenceSample sample_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EstimateReport& report);
EstimateReport report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const LabeledPair& pair);
LabeledPair labeled_pair_from_json(const nlohmann::json& j);

/// Record envelopes with the schema tag and a kind.
nlohmann::json sample_record(const std::string& prompt_id, std::size_t index, const SequenceSample& sample,
                             double normalized_weight);
nlohmann::json pair_record(const std::string& prompt_id, std::size_t index, const SamplePair& pair,
                           double normalized_weight);
nlohmann::json report_record(const EstimateReport& report);

/// Throws CorruptTrace unless `j` carries the record schema and `kind`.
void expect_kind(const Record& r, const std::string& file, std::string_view kind);

}  // namespace semsteer

#endif  // SEMSTEER_RECORDS_HPP
