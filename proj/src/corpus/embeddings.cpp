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

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rpr/common.hpp"
#include "rpr/corpus/corpus.hpp"

namespace rpr::corpus {

namespace {

bool parse_int(const std::string& s, long long* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == nullptr || *end != '\0') return false;
  *out = v;
  return true;
}

bool parse_double(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == nullptr || *end != '\0') return false;
  *out = v;
  return true;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> parts;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) parts.push_back(std::move(tok));
  return parts;
}

void random_row(Tensor& table, int row, int dim, const std::string& token, uint64_t seed) {
  const double bound = 0.5 / static_cast<double>(dim);
  Rng rng(derive_seed(seed, fnv1a64(token)));
  for (int k = 0; k < dim; ++k) table.at(row, k) = rng.uniform(-bound, bound);
}

}  // namespace

Tensor load_embeddings(const std::string& path, const Vocabulary& vocab, int dim, uint64_t seed,
                       EmbeddingLoadReport* report) {
  if (dim <= 0) throw ConfigError("load_embeddings: dimension must be positive");
  Tensor table({vocab.size(), dim});
  std::vector<uint8_t> filled(static_cast<size_t>(vocab.size()), 0);

  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open embedding file: " + path);
    std::string line;
    size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::vector<std::string> parts = split_ws(line);
      if (first) {
        first = false;
        // Optional word2vec-style header: "<count> <dim>".
        long long cnt = 0, file_dim = 0;
        if (parts.size() == 2 && parse_int(parts[0], &cnt) && parse_int(parts[1], &file_dim)) {
          if (file_dim != dim)
            throw ConfigError("embedding file dimension " + std::to_string(file_dim) +
                              " does not match configured dimension " + std::to_string(dim));
          continue;
        }
      }
      if (parts.size() != static_cast<size_t>(dim) + 1)
        throw DataError("embedding file line " + std::to_string(line_no) + ": expected " +
                        std::to_string(dim) + " values, got " +
                        std::to_string(parts.empty() ? 0 : parts.size() - 1));
      auto it = vocab.index.find(parts[0]);
      if (it == vocab.index.end() || it->second == vocab.pad) continue;
      for (int k = 0; k < dim; ++k) {
        double v = 0.0;
        if (!parse_double(parts[static_cast<size_t>(k) + 1], &v))
          throw DataError("embedding file line " + std::to_string(line_no) +
                          ": non-numeric value");
        table.at(it->second, k) = v;
      }
      filled[static_cast<size_t>(it->second)] = 1;
    }
  }

  EmbeddingLoadReport rep;
  for (int i = 0; i < vocab.size(); ++i) {
    if (i == vocab.pad) continue;  // pad row stays zero and frozen
    if (filled[static_cast<size_t>(i)]) {
      ++rep.found;
    } else {
      ++rep.missing;
      random_row(table, i, dim, vocab.tokens[static_cast<size_t>(i)], seed);
    }
  }
  rep.coverage = rep.found + rep.missing == 0
                     ? 0.0
                     : static_cast<double>(rep.found) / static_cast<double>(rep.found + rep.missing);
  if (report != nullptr) *report = rep;
  return table;
}

}  // namespace rpr::corpus
