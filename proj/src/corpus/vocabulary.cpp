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

#include <algorithm>
#include <map>
#include <string>

#include "rpr/common.hpp"
#include "rpr/corpus/corpus.hpp"

namespace rpr::corpus {

Vocabulary build_vocabulary(const std::vector<TokenDocuments>& documents, int min_count) {
  if (min_count < 1) throw ConfigError("build_vocabulary: min_count must be >= 1");
  // The merged sequence repeats the polarity sequences, so counts come from
  // the positive and negative documents only.
  std::map<std::string, size_t> counts;  // ordered map fixes the tie scan
  for (const auto& d : documents) {
    for (const auto& t : d.positive) ++counts[t];
    for (const auto& t : d.negative) ++counts[t];
  }
  std::vector<std::pair<std::string, size_t>> order(counts.begin(), counts.end());
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocabulary v;
  for (auto& [tok, cnt] : order) {
    if (cnt < static_cast<size_t>(min_count)) continue;
    v.index.emplace(tok, static_cast<int>(v.tokens.size()));
    v.tokens.push_back(tok);
  }
  v.oov = static_cast<int>(v.tokens.size());
  v.tokens.push_back("<oov>");
  v.index.emplace("<oov>", v.oov);
  v.pad = static_cast<int>(v.tokens.size());
  v.tokens.push_back("<pad>");
  v.index.emplace("<pad>", v.pad);
  return v;
}

}  // namespace rpr::corpus
