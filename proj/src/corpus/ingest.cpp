// Copyright 2026 The RPR Authors
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

#include <cctype>
#include <fstream>
#include <istream>
#include <string>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "rpr/common.hpp"
#include "rpr/corpus/corpus.hpp"

namespace rpr::corpus {

namespace {

bool all_whitespace(const std::string& s) {
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  return true;
}

std::string field_string(const nlohmann::json& j, const std::string& field, size_t line) {
  auto it = j.find(field);
  if (it == j.end())
    throw DataError("line " + std::to_string(line) + ": missing field '" + field + "'");
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  throw DataError("line " + std::to_string(line) + ": field '" + field + "' is not a string");
}

double field_number(const nlohmann::json& j, const std::string& field, size_t line) {
  auto it = j.find(field);
  if (it == j.end())
    throw DataError("line " + std::to_string(line) + ": missing field '" + field + "'");
  if (!it->is_number())
    throw DataError("line " + std::to_string(line) + ": field '" + field + "' is not numeric");
  return it->get<double>();
}

}  // namespace

std::pair<std::vector<InteractionRecord>, IngestSummary> ingest_records(
    std::istream& in, const RecordSchema& schema) {
  std::vector<InteractionRecord> records;
  IngestSummary summary;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || all_whitespace(line)) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw DataError("line " + std::to_string(line_no) + ": undecodable JSON record");
    InteractionRecord rec;
    rec.user_id = field_string(j, schema.user_field, line_no);
    rec.item_id = field_string(j, schema.item_field, line_no);
    rec.rating = field_number(j, schema.rating_field, line_no);
    // A missing review field reads as empty rather than a schema error: some
    // dumps omit the text key on empty reviews.
    auto rit = j.find(schema.review_field);
    if (rit != j.end()) {
      if (!rit->is_string())
        throw DataError("line " + std::to_string(line_no) + ": field '" + schema.review_field +
                        "' is not a string");
      rec.review = rit->get<std::string>();
    }
    if (rec.rating < 1.0 || rec.rating > 5.0) {
      ++summary.dropped_range;
      continue;
    }
    if (rec.review.empty() || all_whitespace(rec.review)) {
      ++summary.dropped_empty;
      continue;
    }
    records.push_back(std::move(rec));
    ++summary.kept;
  }
  return {std::move(records), summary};
}

std::pair<std::vector<InteractionRecord>, IngestSummary> ingest_file(const std::string& path,
                                                                     const RecordSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open record file: " + path);
  return ingest_records(in, schema);
}

std::vector<InteractionRecord> k_core_filter(std::vector<InteractionRecord> records, int k) {
  if (k <= 1) return records;
  bool changed = true;
  while (changed) {
    changed = false;
    std::unordered_map<std::string, int> users, items;
    for (const auto& r : records) {
      ++users[r.user_id];
      ++items[r.item_id];
    }
    std::vector<InteractionRecord> kept;
    kept.reserve(records.size());
    for (auto& r : records) {
      if (users[r.user_id] >= k && items[r.item_id] >= k)
        kept.push_back(std::move(r));
      else
        changed = true;
    }
    records = std::move(kept);
  }
  return records;
}

}  // namespace rpr::corpus
