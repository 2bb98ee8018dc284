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
#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "rpr/common.hpp"
#include "rpr/corpus/corpus.hpp"

namespace rpr::corpus {

namespace {

uint64_t record_hash(const InteractionRecord& r) {
  uint64_t h = fnv1a64(r.user_id);
  const unsigned char sep = 0x1f;
  h = fnv1a64(&sep, 1, h);
  return fnv1a64(r.item_id, h);
}

// Moves one non-train record of each uncovered entity into train, choosing
// the smallest stable (user_id, item_id) hash, index as tie-break.
template <typename KeyOf>
void cover(const std::vector<InteractionRecord>& records, std::vector<int>& part,
           std::vector<int>& train_count, const std::unordered_map<std::string, int>& key_index,
           KeyOf key_of) {
  const int n_keys = static_cast<int>(key_index.size());
  std::vector<std::pair<uint64_t, int>> best(static_cast<size_t>(n_keys),
                                             {UINT64_MAX, -1});
  for (size_t i = 0; i < records.size(); ++i) {
    if (part[i] == 0) continue;
    const int k = key_index.at(key_of(records[i]));
    const uint64_t h = record_hash(records[i]);
    auto& b = best[static_cast<size_t>(k)];
    if (h < b.first || (h == b.first && static_cast<int>(i) < b.second))
      b = {h, static_cast<int>(i)};
  }
  for (int k = 0; k < n_keys; ++k) {
    if (train_count[static_cast<size_t>(k)] > 0) continue;
    const int idx = best[static_cast<size_t>(k)].second;
    if (idx < 0) continue;  // entity vanished from non-train parts already
    part[static_cast<size_t>(idx)] = 0;
    train_count[static_cast<size_t>(k)] += 1;
  }
}

}  // namespace

DatasetSplit split_dataset(const std::vector<InteractionRecord>& records, uint64_t seed,
                           double train_frac, double val_frac) {
  const size_t n = records.size();
  if (n == 0) throw DataError("split_dataset: empty corpus");
  if (train_frac <= 0.0 || train_frac >= 1.0)
    throw ConfigError("split_dataset: train fraction must be in (0, 1)");
  if (val_frac < 0.0 || val_frac >= 1.0)
    throw ConfigError("split_dataset: validation fraction must be in [0, 1)");

  std::vector<int> perm(n);
  for (size_t i = 0; i < n; ++i) perm[i] = static_cast<int>(i);
  Rng rng(derive_seed(seed, 0x5117ULL));
  rng.shuffle(perm);

  const size_t n_train_all = static_cast<size_t>(std::floor(static_cast<double>(n) * train_frac));
  const size_t n_val = static_cast<size_t>(std::floor(static_cast<double>(n_train_all) * val_frac));

  // part: 0 train, 1 validation, 2 test. Validation is carved from the train
  // share before the coverage adjustment.
  std::vector<int> part(n, 2);
  for (size_t i = 0; i < n_train_all; ++i)
    part[static_cast<size_t>(perm[i])] = i < n_train_all - n_val ? 0 : 1;

  std::unordered_map<std::string, int> user_index, item_index;
  for (const auto& r : records) {
    user_index.emplace(r.user_id, static_cast<int>(user_index.size()));
    item_index.emplace(r.item_id, static_cast<int>(item_index.size()));
  }
  std::vector<int> user_train(user_index.size(), 0), item_train(item_index.size(), 0);
  for (size_t i = 0; i < n; ++i) {
    if (part[i] != 0) continue;
    user_train[static_cast<size_t>(user_index.at(records[i].user_id))] += 1;
    item_train[static_cast<size_t>(item_index.at(records[i].item_id))] += 1;
  }

  cover(records, part, user_train, user_index,
        [](const InteractionRecord& r) -> const std::string& { return r.user_id; });
  // Recount items: user moves may have covered items as well.
  std::fill(item_train.begin(), item_train.end(), 0);
  for (size_t i = 0; i < n; ++i)
    if (part[i] == 0)
      item_train[static_cast<size_t>(item_index.at(records[i].item_id))] += 1;
  cover(records, part, item_train, item_index,
        [](const InteractionRecord& r) -> const std::string& { return r.item_id; });

  DatasetSplit split;
  split.seed = seed;
  for (size_t i = 0; i < n; ++i) {
    if (part[i] == 0)
      split.train.push_back(static_cast<int>(i));
    else if (part[i] == 1)
      split.validation.push_back(static_cast<int>(i));
    else
      split.test.push_back(static_cast<int>(i));
  }
  if (split.test.empty())
    throw DataError("split_dataset: split infeasible, coverage adjustment exhausted the test set");
  return split;
}

}  // namespace rpr::corpus
