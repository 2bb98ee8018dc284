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

#include <cmath>
#include <string>
#include <vector>

#include "rpr/common.hpp"
#include "rpr/model/model.hpp"

namespace rpr::model {

const char* model_kind_name(ModelKind kind) {
  return kind == ModelKind::kMf ? "mf" : "rpr";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "rpr") return ModelKind::kRpr;
  if (name == "mf") return ModelKind::kMf;
  throw ConfigError("unknown model kind '" + name + "' (expected rpr or mf)");
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kBase: return "base";
    case Variant::kCoarseGrained: return "coarse_grained";
    case Variant::kNoPolarity: return "no_polarity";
    case Variant::kUniformImportance: return "uniform_importance";
    case Variant::kNoOffset: return "no_offset";
  }
  throw ConfigError("invalid variant value");
}

Variant parse_variant(const std::string& name) {
  for (Variant v : all_variants())
    if (name == variant_name(v)) return v;
  throw ConfigError("unknown variant '" + name +
                    "' (expected base, coarse_grained, no_polarity, uniform_importance or "
                    "no_offset)");
}

std::vector<Variant> all_variants() {
  return {Variant::kBase, Variant::kCoarseGrained, Variant::kNoPolarity,
          Variant::kUniformImportance, Variant::kNoOffset};
}

const char* param_name(int id) {
  switch (id) {
    case kUserFactors: return "user_factors";
    case kItemFactors: return "item_factors";
    case kPreferredIndicators: return "preferred_indicators";
    case kRejectedIndicators: return "rejected_indicators";
    case kConvFilters: return "conv_filters";
    case kConvBias: return "conv_bias";
    case kPreferredHeadWeight: return "preferred_head_weight";
    case kPreferredHeadBias: return "preferred_head_bias";
    case kRejectedHeadWeight: return "rejected_head_weight";
    case kRejectedHeadBias: return "rejected_head_bias";
    case kAttentionWeight: return "attention_weight";
    case kAttentionBias: return "attention_bias";
    case kAttentionVector: return "attention_vector";
    case kWordEmbeddings: return "word_embeddings";
  }
  throw LookupError("invalid parameter id " + std::to_string(id));
}

Tensor& ModelParams::tensor(int param_id) {
  switch (param_id) {
    case kUserFactors: return user_factors;
    case kItemFactors: return item_factors;
    case kPreferredIndicators: return preferred_indicators;
    case kRejectedIndicators: return rejected_indicators;
    case kConvFilters: return conv_filters;
    case kConvBias: return conv_bias;
    case kPreferredHeadWeight: return preferred_head_weight;
    case kPreferredHeadBias: return preferred_head_bias;
    case kRejectedHeadWeight: return rejected_head_weight;
    case kRejectedHeadBias: return rejected_head_bias;
    case kAttentionWeight: return attention_weight;
    case kAttentionBias: return attention_bias;
    case kAttentionVector: return attention_vector;
    case kWordEmbeddings: return word_embeddings;
  }
  throw LookupError("invalid parameter id " + std::to_string(param_id));
}

const Tensor& ModelParams::tensor(int param_id) const {
  return const_cast<ModelParams*>(this)->tensor(param_id);
}

std::vector<int> ModelParams::active_params() const {
  if (kind == ModelKind::kMf) return {kUserFactors, kItemFactors};
  std::vector<int> all(kNumParams);
  for (int i = 0; i < kNumParams; ++i) all[static_cast<size_t>(i)] = i;
  return all;
}

namespace {

void fill_uniform(Tensor& t, Rng& rng, double bound) {
  for (size_t i = 0; i < t.numel(); ++i) t.data()[i] = rng.uniform(-bound, bound);
}

double xavier(int fan_in, int fan_out) {
  return std::sqrt(6.0 / (static_cast<double>(fan_in) + static_cast<double>(fan_out)));
}

}  // namespace

ModelParams init_params(const ModelDims& dims_in, ModelKind kind, Variant variant, uint64_t seed,
                        const Tensor* embeddings) {
  ModelDims dims = dims_in;
  if (dims.n_users <= 0 || dims.n_items <= 0)
    throw ConfigError("init_params: user and item counts must be positive");
  if (dims.latent_dim <= 0) throw ConfigError("init_params: latent dimension must be positive");

  ModelParams p;
  p.kind = kind;
  p.variant = variant;

  // One stream per parameter so a dimension change elsewhere never shifts
  // another tensor's draws.
  auto stream = [seed](int id) { return Rng(derive_seed(seed, 0xab0000ULL + id)); };

  const int f = dims.latent_dim;
  if (kind == ModelKind::kMf) {
    dims.preferred_aspects = 0;
    dims.rejected_aspects = 0;
    dims.n_filters = 0;
    dims.filter_width = 0;
    dims.embed_dim = 0;
    dims.attention_hidden = 0;
    dims.vocab_size = 0;
    p.dims = dims;
    p.user_factors = Tensor({dims.n_users, f});
    p.item_factors = Tensor({dims.n_items, f});
    Rng ru = stream(kUserFactors), ri = stream(kItemFactors);
    fill_uniform(p.user_factors, ru, xavier(f, f));
    fill_uniform(p.item_factors, ri, xavier(f, f));
    return p;
  }

  if (dims.preferred_aspects <= 0 || dims.rejected_aspects <= 0)
    throw ConfigError("init_params: aspect counts must be positive");
  if (dims.n_filters <= 0 || dims.embed_dim <= 0 || dims.attention_hidden <= 0)
    throw ConfigError("init_params: network dimensions must be positive");
  if (dims.filter_width <= 0 || dims.filter_width % 2 == 0)
    throw ConfigError("init_params: filter width must be odd and positive");
  if (embeddings != nullptr) {
    if (embeddings->rank() != 2 || embeddings->dim(1) != dims.embed_dim)
      throw ConfigError("init_params: embedding table dimension mismatch");
    dims.vocab_size = embeddings->dim(0);
  }
  if (dims.vocab_size <= 0) throw ConfigError("init_params: vocabulary size must be positive");
  p.dims = dims;

  const int P = dims.preferred_aspects, R = dims.rejected_aspects;
  const int n_f = dims.n_filters, c = dims.filter_width;
  const int d = dims.embed_dim, hid = dims.attention_hidden;

  p.user_factors = Tensor({dims.n_users, f});
  p.item_factors = Tensor({dims.n_items, f});
  p.preferred_indicators = Tensor({f, P});
  p.rejected_indicators = Tensor({f, R});
  p.conv_filters = Tensor({c, d, n_f});
  p.conv_bias = Tensor({n_f});
  p.preferred_head_weight = Tensor({P, n_f});
  p.preferred_head_bias = Tensor({P});
  p.rejected_head_weight = Tensor({R, n_f});
  p.rejected_head_bias = Tensor({R});
  p.attention_weight = Tensor({hid, f});
  p.attention_bias = Tensor({hid});
  p.attention_vector = Tensor({hid});
  p.word_embeddings = Tensor({dims.vocab_size, d});

  struct WeightInit {
    int id;
    double bound;
  };
  const WeightInit weights[] = {
      {kUserFactors, xavier(f, f)},
      {kItemFactors, xavier(f, f)},
      {kPreferredIndicators, xavier(f, P)},
      {kRejectedIndicators, xavier(f, R)},
      {kConvFilters, xavier(c * d, n_f)},
      {kPreferredHeadWeight, xavier(n_f, P)},
      {kRejectedHeadWeight, xavier(n_f, R)},
      {kAttentionWeight, xavier(f, hid)},
      {kAttentionVector, xavier(hid, 1)},
  };
  for (const auto& w : weights) {
    Rng rng = stream(w.id);
    fill_uniform(p.tensor(w.id), rng, w.bound);
  }

  if (embeddings != nullptr) {
    p.word_embeddings = *embeddings;
  } else {
    // No corpus table supplied (toy instances): draw rows the way the loader
    // initializes missing tokens; the last row stands in for pad and is zero.
    Rng rng = stream(kWordEmbeddings);
    fill_uniform(p.word_embeddings, rng, 0.5 / d);
    for (int j = 0; j < d; ++j) p.word_embeddings.at(dims.vocab_size - 1, j) = 0.0;
  }
  return p;
}

}  // namespace rpr::model
