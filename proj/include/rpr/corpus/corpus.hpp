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

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rpr/corpus/types.hpp"
#include "rpr/tensor.hpp"

namespace rpr::corpus {

// Lowercased word tokens: unicode punctuation is stripped except hyphens and
// apostrophes between alphanumerics; tokens are whitespace-delimited.
std::vector<std::string> tokenize(const std::string& text);

// Reads one JSON record per line. Undecodable lines and missing or mistyped
// fields raise DataError naming the line; empty reviews and out-of-range
// ratings are dropped and counted. Record order follows input order.
std::pair<std::vector<InteractionRecord>, IngestSummary> ingest_records(std::istream& in,
                                                                        const RecordSchema& schema);
std::pair<std::vector<InteractionRecord>, IngestSummary> ingest_file(const std::string& path,
                                                                     const RecordSchema& schema);

// Iteratively drops records of users/items with fewer than k records.
std::vector<InteractionRecord> k_core_filter(std::vector<InteractionRecord> records, int k);

// Random train/test split with a validation share carved from train, then a
// coverage adjustment that moves records into train until every user and
// item appears there. Throws DataError when the adjustment leaves no test
// records ("split infeasible").
DatasetSplit split_dataset(const std::vector<InteractionRecord>& records, uint64_t seed,
                           double train_frac = 0.8, double val_frac = 0.1);

// Per-user string-token documents built from training reviews only, in input
// order, truncated to the most recent max_len tokens per sequence.
struct TokenDocuments {
  std::vector<std::string> positive;
  std::vector<std::string> negative;
  std::vector<std::string> merged;
};
std::vector<TokenDocuments> build_polarity_documents(
    const std::vector<InteractionRecord>& records, const DatasetSplit& split,
    const std::vector<std::string>& user_ids,
    const std::unordered_map<std::string, int>& user_index, double threshold = 3.0,
    int max_len = 500);

// Vocabulary over document tokens: descending frequency, ties lexicographic,
// tokens below min_count excluded, OOV and PAD appended last.
Vocabulary build_vocabulary(const std::vector<TokenDocuments>& documents, int min_count = 1);

struct EmbeddingLoadReport {
  size_t found = 0;
  size_t missing = 0;
  double coverage = 0.0;  // found / (found + missing)
};

// Embedding table for the vocabulary. Tokens present in the whitespace text
// file (optional word2vec-style count/dim header) take their file vectors;
// absent tokens draw uniform [-0.5/d, 0.5/d] rows from a seed derived per
// token. The pad row is zero. An empty path initializes every row randomly.
Tensor load_embeddings(const std::string& path, const Vocabulary& vocab, int dim, uint64_t seed,
                       EmbeddingLoadReport* report = nullptr);

struct SyntheticConfig {
  int n_users = 0;
  int n_items = 0;
  int n_preferred = 2;
  int n_rejected = 2;
  double imbalance_ratio = 0.5;  // share of positive reviews per user
  double noise = 0.0;            // stddev of rating noise
  uint64_t seed = 0;
  int reviews_per_user = 6;
  int words_per_review = 6;
  int pool_size = 12;            // planted words per aspect
  bool uniform_importance = false;
  // Both polarities draw words from one shared aspect vocabulary, so only
  // the review's polarity tells the two sides apart. Requires matching
  // aspect counts.
  bool shared_pools = false;
  // How strongly rejected importance mirrors preferred importance when the
  // aspect counts match: 1 copies it, 0 draws it independently, values in
  // between blend the two and renormalize.
  double rejected_mix = 1.0;
};

// Planted ground truth emitted next to the synthetic records.
struct SyntheticTruth {
  std::vector<std::vector<double>> user_preferred;  // simplex per user
  std::vector<std::vector<double>> user_rejected;
  std::vector<std::vector<double>> item_preferred;  // qualities in [0, 1]
  std::vector<std::vector<double>> item_rejected;
  std::vector<std::vector<std::string>> preferred_pools;
  std::vector<std::vector<std::string>> rejected_pools;
  double amplitude = 1.8;
};

// Ratings follow a clipped affine transform of the planted importance/quality
// inner-product difference plus noise; review words are drawn from the
// polarity's aspect pools proportionally to the user's planted importance.
std::pair<std::vector<InteractionRecord>, SyntheticTruth> generate_synthetic(
    const SyntheticConfig& config);

// Fully prepared corpus: encoded documents, vocabulary, split, embeddings.
struct CorpusView {
  struct Triple {
    int user;
    int item;
    double rating;
  };

  DatasetSplit split;
  std::vector<std::string> user_ids;
  std::vector<std::string> item_ids;
  std::unordered_map<std::string, int> user_index;
  std::unordered_map<std::string, int> item_index;
  std::vector<PolarityDocuments> documents;  // per user index
  Vocabulary vocab;
  Tensor embeddings;
  std::vector<Triple> triples;  // aligned with ingest order
  uint64_t fingerprint = 0;
  double threshold = 3.0;
  int max_doc_len = 500;

  int n_users() const { return static_cast<int>(user_ids.size()); }
  int n_items() const { return static_cast<int>(item_ids.size()); }
  std::vector<Triple> partition(const std::vector<int>& indices) const;
  double train_rating_mean() const;
};

struct PrepareOptions {
  uint64_t seed = 42;
  double train_frac = 0.8;
  double val_frac = 0.1;
  double threshold = 3.0;
  int max_doc_len = 500;
  int min_count = 1;
  int k_core = 0;
  int embedding_dim = 50;
  std::string embedding_path;  // empty: random init
};

// Hash over vocabulary plus entity id maps; ties checkpoints to the corpus.
uint64_t corpus_fingerprint(const Vocabulary& vocab, const std::vector<std::string>& user_ids,
                            const std::vector<std::string>& item_ids);

CorpusView prepare_corpus(const std::vector<InteractionRecord>& records,
                          const PrepareOptions& options,
                          EmbeddingLoadReport* embed_report = nullptr);

}  // namespace rpr::corpus
