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
#include <map>
#include <string>

#include "rpr/corpus/corpus.hpp"
#include "rpr/model/model.hpp"

namespace rpr::io {

inline constexpr const char* kToolVersion = "rpr 0.1.0";

// --- corpus cache -----------------------------------------------------------
// A prepared corpus as a directory: meta.json, vocab.tsv, users.tsv,
// items.tsv, documents.bin, triples.bin, split.json, embeddings.bin.
// Loading validates the version stamp and every size; corrupt files raise
// DataError naming the file.
void save_corpus(const corpus::CorpusView& view, const std::string& dir);
corpus::CorpusView load_corpus(const std::string& dir);

// --- model checkpoints ------------------------------------------------------
// Single binary file, little-endian: magic, format version, the model
// dimensions, kind, variant, the corpus fingerprint, then every tensor with
// its name and shape. Round-trips are bit-exact.
void save_checkpoint(const model::ModelParams& params, const std::string& path);
model::ModelParams load_checkpoint(const std::string& path);

// Raises DataError when a checkpoint was built against a different corpus
// (the vocabulary and id lists hash into the fingerprint).
void require_matching_corpus(const model::ModelParams& params,
                             const corpus::CorpusView& view);

// --- run manifests ----------------------------------------------------------
// What produced an artifact directory: the subcommand, the resolved config,
// the seed, digests of every input file, tool version, and a UTC timestamp.
// Runs are reproducible from a manifest modulo the timestamp itself.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config;
  std::uint64_t seed = 0;
  std::map<std::string, std::uint64_t> input_digests;
  std::string tool_version = kToolVersion;
  std::string created_utc;  // filled at write time when empty
};

// FNV-1a over the raw bytes of a file; DataError when unreadable.
std::uint64_t file_digest(const std::string& path);

// Writes <dir>/manifest.json atomically (temp file then rename).
void write_run_manifest(const RunManifest& manifest, const std::string& dir);

}  // namespace rpr::io
