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
#include <string>
#include <unordered_map>
#include <vector>

#include "rpr/corpus/corpus.hpp"
#include "rpr/tensor.hpp"

namespace rpr::model {

// kMf is the plain dot-product baseline; it owns only the factor matrices.
enum class ModelKind { kRpr = 0, kMf = 1 };

enum class Variant {
  kBase = 0,
  kCoarseGrained = 1,       // max-pool conv features before the head
  kNoPolarity = 2,          // merged document feeds both heads
  kUniformImportance = 3,   // fixed uniform importance, no text path
  kNoOffset = 4,            // raw importance, no attention transfer
};

const char* model_kind_name(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);
const char* variant_name(Variant v);
Variant parse_variant(const std::string& name);
// kBase first, then the ablations in enum order.
std::vector<Variant> all_variants();

// Canonical parameter identities: checkpoint layout, gradient collection and
// optimizer group membership all use this order.
enum ParamId : int {
  kUserFactors = 0,
  kItemFactors = 1,
  kPreferredIndicators = 2,   // (f x |P|), columns associate factors to aspects
  kRejectedIndicators = 3,    // (f x |R|)
  kConvFilters = 4,           // (width, embed_dim, n_filters)
  kConvBias = 5,
  kPreferredHeadWeight = 6,   // (|P| x n_filters)
  kPreferredHeadBias = 7,
  kRejectedHeadWeight = 8,    // (|R| x n_filters)
  kRejectedHeadBias = 9,
  kAttentionWeight = 10,      // (hidden x f)
  kAttentionBias = 11,
  kAttentionVector = 12,
  kWordEmbeddings = 13,       // (vocab x embed_dim), pad row zero and frozen
  kNumParams = 14,
};
const char* param_name(int id);

struct ModelDims {
  int n_users = 0;
  int n_items = 0;
  int latent_dim = 32;
  int preferred_aspects = 2;
  int rejected_aspects = 2;
  int n_filters = 50;
  int filter_width = 3;
  int embed_dim = 50;
  int attention_hidden = 32;
  int vocab_size = 0;
};

struct ModelParams {
  ModelDims dims;
  ModelKind kind = ModelKind::kRpr;
  Variant variant = Variant::kBase;
  uint64_t corpus_fingerprint = 0;

  Tensor user_factors;
  Tensor item_factors;
  Tensor preferred_indicators;
  Tensor rejected_indicators;
  Tensor conv_filters;
  Tensor conv_bias;
  Tensor preferred_head_weight;
  Tensor preferred_head_bias;
  Tensor rejected_head_weight;
  Tensor rejected_head_bias;
  Tensor attention_weight;
  Tensor attention_bias;
  Tensor attention_vector;
  Tensor word_embeddings;

  Tensor& tensor(int param_id);
  const Tensor& tensor(int param_id) const;
  // Parameters this kind owns, in canonical order (kMf: factors only).
  std::vector<int> active_params() const;
};

// Xavier-uniform weights, bound sqrt(6 / (fan_in + fan_out)) with the fans of
// the map each matrix realizes (factor rows use fan_in = fan_out = f); biases
// zero; embeddings copied from the corpus table when given, else drawn like
// the corpus loader would. Deterministic under seed.
ModelParams init_params(const ModelDims& dims, ModelKind kind, Variant variant, uint64_t seed,
                        const Tensor* embeddings = nullptr);

enum class Polarity { kPreferred = 0, kRejected = 1 };

// --- plain forward path (evaluation mode, no tape, no dropout) ---
// These run the same kernels the tape records, so values are bit-identical
// to a training-mode forward with dropout disabled.

// softmax over the summed per-word head outputs; the coarse-grained variant
// max-pools conv features and applies the head once. An empty document gives
// the uniform vector.
Tensor extract_importance(const ModelParams& params, const std::vector<int>& doc, Polarity side,
                          Variant variant);

// Column-simplex attention maps between indicator columns. phi (|P| x |R|)
// mixes preferred importance into rejected offsets; psi (|R| x |P|) mirrors
// it. Both derive from one logit matrix, column-softmaxed along each axis.
struct AttentionMaps {
  Tensor phi;
  Tensor psi;
};
AttentionMaps attention_maps(const ModelParams& params);

// Per-user importance bundle. For offset-free variants mu is zero; for the
// uniform variant every vector is uniform.
struct UserImportance {
  Tensor rho_p, rho_r;
  Tensor mu_p, mu_r;
  Tensor rho_p_plus, rho_r_plus;
};
UserImportance user_importance(const ModelParams& params, const corpus::PolarityDocuments& docs,
                               const AttentionMaps* maps);

struct AspectProfile {
  Tensor s_p, s_r;                 // aspect scores for the pair
  Tensor rho_p, rho_r;             // raw importance (simplex)
  Tensor mu_p, mu_r;               // attention offsets
  Tensor rho_p_plus, rho_r_plus;   // enhanced importance
  double positive_term = 0.0;      // rho_p_plus . s_p
  double negative_term = 0.0;      // rho_r_plus . s_r
  double r_hat = 0.0;              // positive_term - negative_term
};

// Inference over a frozen parameter snapshot; caches per-user importance and
// the attention maps. Reentrant reads are safe only from one thread (the
// cache mutates); clone per thread to fan out.
class Predictor {
 public:
  Predictor(const ModelParams& params, const corpus::CorpusView& view);

  double predict(int user, int item);
  AspectProfile profile(int user, int item);
  const UserImportance& importance(int user);

  // Testing hook: replaces both attention maps (e.g. with zeros) and drops
  // cached importance so offsets recompute against the override.
  void override_attention(Tensor phi, Tensor psi);

  const ModelParams& params() const { return params_; }

 private:
  const ModelParams& params_;
  const corpus::CorpusView& view_;
  AttentionMaps maps_;
  bool has_maps_ = false;
  std::unordered_map<int, UserImportance> cache_;
};

}  // namespace rpr::model
