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

#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace rpr::corpus {

struct InteractionRecord {
  std::string user_id;
  std::string item_id;
  double rating = 0.0;
  std::string review;
};

struct IngestSummary {
  size_t kept = 0;
  size_t dropped_empty = 0;
  size_t dropped_range = 0;
};

// Field names of one JSON record per line.
struct RecordSchema {
  std::string user_field;
  std::string item_field;
  std::string rating_field;
  std::string review_field;

  static RecordSchema amazon() { return {"reviewerID", "asin", "overall", "reviewText"}; }
  static RecordSchema yelp() { return {"user_id", "business_id", "stars", "text"}; }
  static RecordSchema generic() { return {"user_id", "item_id", "rating", "review"}; }
};

// Record indices per partition, in record order.
struct DatasetSplit {
  std::vector<int> train;
  std::vector<int> validation;
  std::vector<int> test;
  uint64_t seed = 0;
};

// Per-user token-id sequences: reviews at or above the polarity threshold,
// reviews below it, and all reviews merged.
struct PolarityDocuments {
  std::vector<int> positive;
  std::vector<int> negative;
  std::vector<int> merged;
};

struct Vocabulary {
  std::vector<std::string> tokens;  // index -> token; specials appended last
  std::unordered_map<std::string, int> index;
  int oov = -1;
  int pad = -1;

  int size() const { return static_cast<int>(tokens.size()); }
  int lookup(const std::string& tok) const {
    auto it = index.find(tok);
    return it == index.end() ? oov : it->second;
  }
};

}  // namespace rpr::corpus
