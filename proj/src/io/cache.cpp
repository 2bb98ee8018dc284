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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rpr/common.hpp"
#include "rpr/io/io.hpp"

namespace rpr::io {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kCacheVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in, const std::string& file) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(v))) {
    throw DataError("truncated cache file '" + file + "'");
  }
  return v;
}

double read_f64(std::istream& in, const std::string& file) {
  double v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(v))) {
    throw DataError("truncated cache file '" + file + "'");
  }
  return v;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + p.string() + "'");
  return out;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open '" + p.string() + "'");
  return in;
}

void require_eof(std::istream& in, const std::string& file) {
  char extra;
  if (in.read(&extra, 1)) {
    throw DataError("trailing bytes in cache file '" + file + "'");
  }
}

void write_id_lines(const fs::path& p, const std::vector<std::string>& ids) {
  std::ofstream out = open_out(p);
  for (const std::string& id : ids) {
    if (id.find('\n') != std::string::npos) {
      throw DataError("id contains a newline and cannot be cached: '" + id +
                      "'");
    }
    out << id << "\n";
  }
  if (!out.flush()) throw DataError("short write to '" + p.string() + "'");
}

std::vector<std::string> read_id_lines(const fs::path& p, std::size_t expect) {
  std::ifstream in = open_in(p);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) ids.push_back(line);
  if (ids.size() != expect) {
    throw DataError("cache file '" + p.string() + "' lists " +
                    std::to_string(ids.size()) + " ids, expected " +
                    std::to_string(expect));
  }
  return ids;
}

void write_sequence(std::ostream& out, const std::vector<int>& seq) {
  write_u32(out, static_cast<std::uint32_t>(seq.size()));
  for (int v : seq) write_u32(out, static_cast<std::uint32_t>(v));
}

std::vector<int> read_sequence(std::istream& in, const std::string& file) {
  const std::uint32_t n = read_u32(in, file);
  std::vector<int> seq(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    seq[i] = static_cast<int>(read_u32(in, file));
  }
  return seq;
}

json split_to_json(const corpus::DatasetSplit& split) {
  return json{{"seed", split.seed},
              {"train", split.train},
              {"validation", split.validation},
              {"test", split.test}};
}

json load_json(const fs::path& p) {
  std::ifstream in = open_in(p);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    throw DataError("cache file '" + p.string() + "' is not valid JSON");
  }
  return j;
}

}  // namespace

void save_corpus(const corpus::CorpusView& view, const std::string& dir) {
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw DataError("cannot create cache directory '" + dir + "'");

  json meta{{"cache_version", kCacheVersion},
            {"fingerprint", view.fingerprint},
            {"threshold", view.threshold},
            {"max_doc_len", view.max_doc_len},
            {"n_users", view.n_users()},
            {"n_items", view.n_items()},
            {"n_records", view.triples.size()},
            {"vocab_size", view.vocab.size()},
            {"oov", view.vocab.oov},
            {"pad", view.vocab.pad},
            {"embed_rows", view.embeddings.rank() == 2 ? view.embeddings.dim(0) : 0},
            {"embed_dim", view.embeddings.rank() == 2 ? view.embeddings.dim(1) : 0}};
  open_out(root / "meta.json") << meta.dump(2) << "\n";

  {
    std::ofstream out = open_out(root / "vocab.tsv");
    for (int i = 0; i < view.vocab.size(); ++i) {
      const std::string& tok = view.vocab.tokens[static_cast<std::size_t>(i)];
      if (tok.find('\t') != std::string::npos ||
          tok.find('\n') != std::string::npos) {
        throw DataError("token contains tsv separators: '" + tok + "'");
      }
      out << tok << "\t" << i << "\n";
    }
  }

  write_id_lines(root / "users.tsv", view.user_ids);
  write_id_lines(root / "items.tsv", view.item_ids);

  {
    std::ofstream out = open_out(root / "documents.bin");
    write_u32(out, static_cast<std::uint32_t>(view.documents.size()));
    for (const corpus::PolarityDocuments& d : view.documents) {
      write_sequence(out, d.positive);
      write_sequence(out, d.negative);
      write_sequence(out, d.merged);
    }
  }

  {
    std::ofstream out = open_out(root / "triples.bin");
    write_u32(out, static_cast<std::uint32_t>(view.triples.size()));
    for (const corpus::CorpusView::Triple& t : view.triples) {
      write_u32(out, static_cast<std::uint32_t>(t.user));
      write_u32(out, static_cast<std::uint32_t>(t.item));
      write_f64(out, t.rating);
    }
  }

  open_out(root / "split.json") << split_to_json(view.split).dump(2) << "\n";

  {
    std::ofstream out = open_out(root / "embeddings.bin");
    const int rows = view.embeddings.rank() == 2 ? view.embeddings.dim(0) : 0;
    const int cols = view.embeddings.rank() == 2 ? view.embeddings.dim(1) : 0;
    write_u32(out, static_cast<std::uint32_t>(rows));
    write_u32(out, static_cast<std::uint32_t>(cols));
    const double* d = view.embeddings.data();
    for (std::size_t i = 0; i < view.embeddings.numel(); ++i) {
      write_f64(out, d[i]);
    }
    if (!out.flush()) throw DataError("short write to embeddings.bin");
  }
}

corpus::CorpusView load_corpus(const std::string& dir) {
  const fs::path root(dir);
  const json meta = load_json(root / "meta.json");
  if (!meta.contains("cache_version") ||
      meta["cache_version"].get<int>() != kCacheVersion) {
    throw DataError("cache '" + dir + "' has an unsupported version stamp");
  }

  corpus::CorpusView view;
  view.fingerprint = meta.at("fingerprint").get<std::uint64_t>();
  view.threshold = meta.at("threshold").get<double>();
  view.max_doc_len = meta.at("max_doc_len").get<int>();
  const auto n_users = meta.at("n_users").get<std::size_t>();
  const auto n_items = meta.at("n_items").get<std::size_t>();
  const auto n_records = meta.at("n_records").get<std::size_t>();
  const int vocab_size = meta.at("vocab_size").get<int>();

  {
    const fs::path p = root / "vocab.tsv";
    std::ifstream in = open_in(p);
    std::string line;
    while (std::getline(in, line)) {
      const std::size_t tab = line.find('\t');
      if (tab == std::string::npos) {
        throw DataError("malformed row in '" + p.string() + "'");
      }
      const std::string tok = line.substr(0, tab);
      const int idx = std::stoi(line.substr(tab + 1));
      if (idx != static_cast<int>(view.vocab.tokens.size())) {
        throw DataError("vocab indices out of order in '" + p.string() + "'");
      }
      view.vocab.tokens.push_back(tok);
      view.vocab.index[tok] = idx;
    }
    if (view.vocab.size() != vocab_size) {
      throw DataError("vocab size mismatch in '" + p.string() + "'");
    }
  }
  view.vocab.oov = meta.at("oov").get<int>();
  view.vocab.pad = meta.at("pad").get<int>();
  if (view.vocab.oov < 0 || view.vocab.oov >= vocab_size ||
      view.vocab.pad < 0 || view.vocab.pad >= vocab_size) {
    throw DataError("special token indices out of range in cache meta");
  }

  view.user_ids = read_id_lines(root / "users.tsv", n_users);
  view.item_ids = read_id_lines(root / "items.tsv", n_items);
  for (std::size_t i = 0; i < view.user_ids.size(); ++i) {
    view.user_index[view.user_ids[i]] = static_cast<int>(i);
  }
  for (std::size_t i = 0; i < view.item_ids.size(); ++i) {
    view.item_index[view.item_ids[i]] = static_cast<int>(i);
  }

  {
    const std::string p = (root / "documents.bin").string();
    std::ifstream in = open_in(p);
    const std::uint32_t n = read_u32(in, p);
    if (n != n_users) {
      throw DataError("document count mismatch in '" + p + "'");
    }
    view.documents.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      view.documents[i].positive = read_sequence(in, p);
      view.documents[i].negative = read_sequence(in, p);
      view.documents[i].merged = read_sequence(in, p);
      for (const std::vector<int>* seq :
           {&view.documents[i].positive, &view.documents[i].negative,
            &view.documents[i].merged}) {
        for (int tok : *seq) {
          if (tok < 0 || tok >= vocab_size) {
            throw DataError("token id out of range in '" + p + "'");
          }
        }
      }
    }
    require_eof(in, p);
  }

  {
    const std::string p = (root / "triples.bin").string();
    std::ifstream in = open_in(p);
    const std::uint32_t n = read_u32(in, p);
    if (n != n_records) throw DataError("record count mismatch in '" + p + "'");
    view.triples.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      view.triples[i].user = static_cast<int>(read_u32(in, p));
      view.triples[i].item = static_cast<int>(read_u32(in, p));
      view.triples[i].rating = read_f64(in, p);
      if (view.triples[i].user < 0 ||
          view.triples[i].user >= static_cast<int>(n_users) ||
          view.triples[i].item < 0 ||
          view.triples[i].item >= static_cast<int>(n_items)) {
        throw DataError("entity index out of range in '" + p + "'");
      }
    }
    require_eof(in, p);
  }

  {
    const fs::path p = root / "split.json";
    const json j = load_json(p);
    view.split.seed = j.at("seed").get<std::uint64_t>();
    view.split.train = j.at("train").get<std::vector<int>>();
    view.split.validation = j.at("validation").get<std::vector<int>>();
    view.split.test = j.at("test").get<std::vector<int>>();
    for (const std::vector<int>* part :
         {&view.split.train, &view.split.validation, &view.split.test}) {
      for (int idx : *part) {
        if (idx < 0 || idx >= static_cast<int>(n_records)) {
          throw DataError("split index out of range in '" + p.string() + "'");
        }
      }
    }
  }

  {
    const std::string p = (root / "embeddings.bin").string();
    std::ifstream in = open_in(p);
    const std::uint32_t rows = read_u32(in, p);
    const std::uint32_t cols = read_u32(in, p);
    const int expect_rows = meta.at("embed_rows").get<int>();
    const int expect_cols = meta.at("embed_dim").get<int>();
    if (static_cast<int>(rows) != expect_rows ||
        static_cast<int>(cols) != expect_cols) {
      throw DataError("embedding shape mismatch in '" + p + "'");
    }
    if (rows > 0) {
      view.embeddings =
          Tensor({static_cast<int>(rows), static_cast<int>(cols)});
      double* d = view.embeddings.data();
      for (std::size_t i = 0; i < view.embeddings.numel(); ++i) {
        d[i] = read_f64(in, p);
      }
    }
    require_eof(in, p);
  }

  const std::uint64_t recomputed =
      corpus::corpus_fingerprint(view.vocab, view.user_ids, view.item_ids);
  if (recomputed != view.fingerprint) {
    throw DataError("cache '" + dir +
                    "' fingerprint does not match its contents");
  }
  return view;
}

}  // namespace rpr::io
