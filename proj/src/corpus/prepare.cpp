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

#include <string>
#include <unordered_map>
#include <vector>

#include "rpr/common.hpp"
#include "rpr/corpus/corpus.hpp"

namespace rpr::corpus {

uint64_t corpus_fingerprint(const Vocabulary& vocab, const std::vector<std::string>& user_ids,
                            const std::vector<std::string>& item_ids) {
  uint64_t h = kFnvOffset;
  auto feed = [&h](const std::string& s) {
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= kFnvPrime;
    }
    h ^= 0x1f;  // separator byte, keeps "ab","c" distinct from "a","bc"
    h *= kFnvPrime;
  };
  for (const auto& t : vocab.tokens) feed(t);
  h ^= 0x02;
  h *= kFnvPrime;
  for (const auto& u : user_ids) feed(u);
  h ^= 0x03;
  h *= kFnvPrime;
  for (const auto& i : item_ids) feed(i);
  return h;
}

std::vector<CorpusView::Triple> CorpusView::partition(const std::vector<int>& indices) const {
  std::vector<Triple> out;
  out.reserve(indices.size());
  for (int idx : indices) out.push_back(triples[static_cast<size_t>(idx)]);
  return out;
}

double CorpusView::train_rating_mean() const {
  if (split.train.empty()) throw DataError("train partition is empty");
  double sum = 0.0;
  for (int idx : split.train) sum += triples[static_cast<size_t>(idx)].rating;
  return sum / static_cast<double>(split.train.size());
}

CorpusView prepare_corpus(const std::vector<InteractionRecord>& records,
                          const PrepareOptions& options, EmbeddingLoadReport* embed_report) {
  if (records.empty()) throw DataError("prepare_corpus: no records");
  if (options.embedding_dim <= 0) throw ConfigError("prepare_corpus: embedding_dim must be positive");

  std::vector<InteractionRecord> working;
  const std::vector<InteractionRecord>* recs = &records;
  if (options.k_core > 0) {
    working = k_core_filter(records, options.k_core);
    if (working.empty()) throw DataError("prepare_corpus: k-core filter removed every record");
    recs = &working;
  }

  CorpusView view;
  view.threshold = options.threshold;
  view.max_doc_len = options.max_doc_len;

  // Entity indices in order of first appearance.
  for (const auto& rec : *recs) {
    if (view.user_index.emplace(rec.user_id, static_cast<int>(view.user_ids.size())).second)
      view.user_ids.push_back(rec.user_id);
    if (view.item_index.emplace(rec.item_id, static_cast<int>(view.item_ids.size())).second)
      view.item_ids.push_back(rec.item_id);
  }

  view.split = split_dataset(*recs, options.seed, options.train_frac, options.val_frac);

  const auto token_docs = build_polarity_documents(*recs, view.split, view.user_ids,
                                                   view.user_index, options.threshold,
                                                   options.max_doc_len);
  view.vocab = build_vocabulary(token_docs, options.min_count);

  view.documents.resize(token_docs.size());
  for (size_t u = 0; u < token_docs.size(); ++u) {
    auto encode = [&](const std::vector<std::string>& toks) {
      std::vector<int> ids;
      ids.reserve(toks.size());
      for (const auto& t : toks) ids.push_back(view.vocab.lookup(t));
      return ids;
    };
    view.documents[u].positive = encode(token_docs[u].positive);
    view.documents[u].negative = encode(token_docs[u].negative);
    view.documents[u].merged = encode(token_docs[u].merged);
  }

  view.embeddings = load_embeddings(options.embedding_path, view.vocab, options.embedding_dim,
                                    derive_seed(options.seed, 0xe3bedULL), embed_report);

  view.triples.reserve(recs->size());
  for (const auto& rec : *recs) {
    CorpusView::Triple t;
    t.user = view.user_index.at(rec.user_id);
    t.item = view.item_index.at(rec.item_id);
    t.rating = rec.rating;
    view.triples.push_back(t);
  }

  view.fingerprint = corpus_fingerprint(view.vocab, view.user_ids, view.item_ids);
  return view;
}

}  // namespace rpr::corpus
