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

#include <vector>

#include "rpr/common.hpp"
#include "rpr/corpus/corpus.hpp"

namespace rpr::corpus {

namespace {

void truncate_to_recent(std::vector<std::string>& seq, size_t max_len) {
  if (seq.size() > max_len) seq.erase(seq.begin(), seq.end() - static_cast<long>(max_len));
}

}  // namespace

std::vector<TokenDocuments> build_polarity_documents(
    const std::vector<InteractionRecord>& records, const DatasetSplit& split,
    const std::vector<std::string>& user_ids,
    const std::unordered_map<std::string, int>& user_index, double threshold, int max_len) {
  if (max_len <= 0) throw ConfigError("build_polarity_documents: max_len must be positive");
  std::vector<TokenDocuments> docs(user_ids.size());
  // split.train is in record (input) order, so concatenation follows it.
  for (int idx : split.train) {
    const InteractionRecord& r = records[static_cast<size_t>(idx)];
    auto it = user_index.find(r.user_id);
    if (it == user_index.end()) throw LookupError("unknown user id: " + r.user_id);
    TokenDocuments& d = docs[static_cast<size_t>(it->second)];
    std::vector<std::string> toks = tokenize(r.review);
    auto& target = r.rating >= threshold ? d.positive : d.negative;
    target.insert(target.end(), toks.begin(), toks.end());
    d.merged.insert(d.merged.end(), toks.begin(), toks.end());
  }
  const size_t cap = static_cast<size_t>(max_len);
  for (auto& d : docs) {
    truncate_to_recent(d.positive, cap);
    truncate_to_recent(d.negative, cap);
    truncate_to_recent(d.merged, cap);
  }
  return docs;
}

}  // namespace rpr::corpus
