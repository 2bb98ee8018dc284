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

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "rpr/common.hpp"
#include "rpr/io/io.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace rpr::io {
namespace {

constexpr char kMagic[8] = {'R', 'P', 'R', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T get(std::istream& in, const std::string& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(v))) {
    throw DataError("truncated checkpoint '" + path + "'");
  }
  return v;
}

void put_tensor(std::ostream& out, const std::string& name, const Tensor& t) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
  for (int i = 0; i < t.rank(); ++i) {
    put<std::uint64_t>(out, static_cast<std::uint64_t>(t.dim(i)));
  }
  out.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(t.numel() * sizeof(double)));
}

}  // namespace

void save_checkpoint(const model::ModelParams& params,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint '" + path + "'");
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.dims.latent_dim));
  put<std::uint32_t>(out,
                     static_cast<std::uint32_t>(params.dims.preferred_aspects));
  put<std::uint32_t>(out,
                     static_cast<std::uint32_t>(params.dims.rejected_aspects));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.dims.n_filters));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.dims.filter_width));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.dims.embed_dim));
  put<std::uint32_t>(out,
                     static_cast<std::uint32_t>(params.dims.attention_hidden));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.kind));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.variant));
  put<std::uint64_t>(out, params.corpus_fingerprint);

  const std::vector<int> active = params.active_params();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(active.size()));
  for (int id : active) {
    put_tensor(out, std::string(model::param_name(id)), params.tensor(id));
  }
  if (!out.flush()) throw DataError("short write to checkpoint '" + path + "'");
}

model::ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path + "'");
  char magic[8];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError("'" + path + "' is not a model checkpoint");
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kFormatVersion) {
    throw DataError("checkpoint '" + path + "' uses format version " +
                    std::to_string(version) + ", expected " +
                    std::to_string(kFormatVersion));
  }

  model::ModelParams params;
  params.dims.latent_dim = static_cast<int>(get<std::uint32_t>(in, path));
  params.dims.preferred_aspects =
      static_cast<int>(get<std::uint32_t>(in, path));
  params.dims.rejected_aspects = static_cast<int>(get<std::uint32_t>(in, path));
  params.dims.n_filters = static_cast<int>(get<std::uint32_t>(in, path));
  params.dims.filter_width = static_cast<int>(get<std::uint32_t>(in, path));
  params.dims.embed_dim = static_cast<int>(get<std::uint32_t>(in, path));
  params.dims.attention_hidden = static_cast<int>(get<std::uint32_t>(in, path));
  const auto kind = get<std::uint32_t>(in, path);
  const auto variant = get<std::uint32_t>(in, path);
  if (kind > 1) throw DataError("checkpoint '" + path + "' has an unknown model kind");
  if (variant > 4) throw DataError("checkpoint '" + path + "' has an unknown variant");
  params.kind = static_cast<model::ModelKind>(kind);
  params.variant = static_cast<model::Variant>(variant);
  params.corpus_fingerprint = get<std::uint64_t>(in, path);

  const auto n_tensors = get<std::uint32_t>(in, path);
  for (std::uint32_t k = 0; k < n_tensors; ++k) {
    const auto name_len = get<std::uint32_t>(in, path);
    if (name_len > 256) {
      throw DataError("corrupt tensor name in checkpoint '" + path + "'");
    }
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) {
      throw DataError("truncated checkpoint '" + path + "'");
    }
    int id = -1;
    for (int i = 0; i < model::kNumParams; ++i) {
      if (name == model::param_name(i)) {
        id = i;
        break;
      }
    }
    if (id < 0) {
      throw DataError("checkpoint '" + path + "' names unknown tensor '" +
                      name + "'");
    }
    const auto rank = get<std::uint32_t>(in, path);
    if (rank > 3) {
      throw DataError("checkpoint '" + path + "' has a rank-" +
                      std::to_string(rank) + " tensor");
    }
    std::vector<int> shape;
    std::size_t numel = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      const auto d = get<std::uint64_t>(in, path);
      if (d == 0 || d > (1u << 30)) {
        throw DataError("corrupt tensor shape in checkpoint '" + path + "'");
      }
      shape.push_back(static_cast<int>(d));
      numel *= static_cast<std::size_t>(d);
    }
    Tensor t{shape};
    if (!in.read(reinterpret_cast<char*>(t.data()),
                 static_cast<std::streamsize>(numel * sizeof(double)))) {
      throw DataError("truncated checkpoint '" + path + "'");
    }
    params.tensor(id) = std::move(t);
  }
  char extra;
  if (in.read(&extra, 1)) {
    throw DataError("trailing bytes in checkpoint '" + path + "'");
  }

  // Recover the corpus-sized dimensions and cross-check the header.
  if (params.user_factors.rank() != 2 || params.item_factors.rank() != 2) {
    throw DataError("checkpoint '" + path + "' is missing the factor tables");
  }
  params.dims.n_users = params.user_factors.dim(0);
  params.dims.n_items = params.item_factors.dim(0);
  if (params.user_factors.dim(1) != params.dims.latent_dim ||
      params.item_factors.dim(1) != params.dims.latent_dim) {
    throw DataError("checkpoint '" + path +
                    "' header disagrees with its factor tables");
  }
  if (params.kind == model::ModelKind::kRpr) {
    if (params.word_embeddings.rank() != 2 ||
        params.word_embeddings.dim(1) != params.dims.embed_dim) {
      throw DataError("checkpoint '" + path +
                      "' header disagrees with its embedding table");
    }
    params.dims.vocab_size = params.word_embeddings.dim(0);
    if (params.conv_filters.rank() != 3 ||
        params.conv_filters.dim(0) != params.dims.filter_width ||
        params.conv_filters.dim(1) != params.dims.embed_dim ||
        params.conv_filters.dim(2) != params.dims.n_filters) {
      throw DataError("checkpoint '" + path +
                      "' header disagrees with its filter bank");
    }
    if (params.preferred_indicators.rank() != 2 ||
        params.preferred_indicators.dim(0) != params.dims.latent_dim ||
        params.preferred_indicators.dim(1) != params.dims.preferred_aspects ||
        params.rejected_indicators.rank() != 2 ||
        params.rejected_indicators.dim(0) != params.dims.latent_dim ||
        params.rejected_indicators.dim(1) != params.dims.rejected_aspects) {
      throw DataError("checkpoint '" + path +
                      "' header disagrees with its indicator matrices");
    }
  }
  return params;
}

void require_matching_corpus(const model::ModelParams& params,
                             const corpus::CorpusView& view) {
  if (params.corpus_fingerprint != view.fingerprint) {
    throw DataError(
        "checkpoint was trained against a different corpus "
        "(vocabulary fingerprint mismatch)");
  }
  if (params.dims.n_users != view.n_users() ||
      params.dims.n_items != view.n_items()) {
    throw DataError("checkpoint entity counts do not match the corpus");
  }
}

}  // namespace rpr::io
