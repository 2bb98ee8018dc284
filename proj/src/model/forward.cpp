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

#include <vector>

#include "rpr/model/model.hpp"
#include "rpr/primitives.hpp"

namespace rpr::model {

Tensor extract_importance(const ModelParams& params, const std::vector<int>& doc, Polarity side,
                          Variant variant) {
  const bool preferred = side == Polarity::kPreferred;
  const int aspects =
      preferred ? params.dims.preferred_aspects : params.dims.rejected_aspects;
  if (doc.empty()) return Tensor::full({aspects}, 1.0 / aspects);

  const Tensor& W = preferred ? params.preferred_head_weight : params.rejected_head_weight;
  const Tensor& b = preferred ? params.preferred_head_bias : params.rejected_head_bias;
  Tensor E = embed_tokens(params.word_embeddings, doc);
  Tensor C = conv_context_fw(E, params.conv_filters, params.conv_bias);
  if (variant == Variant::kCoarseGrained) {
    Tensor pooled = max_rows_fw(C);
    return softmax_fw(vec_affine_relu_fw(pooled, W, b));
  }
  Tensor H = rows_affine_relu_fw(C, W, b);
  return softmax_fw(sum_rows_fw(H));
}

AttentionMaps attention_maps(const ModelParams& params) {
  Tensor logits = attention_scores_fw(params.preferred_indicators, params.rejected_indicators,
                                      params.attention_weight, params.attention_bias,
                                      params.attention_vector);
  AttentionMaps maps;
  maps.phi = softmax_columns_fw(logits);
  maps.psi = softmax_columns_fw(transpose_fw(logits));
  return maps;
}

UserImportance user_importance(const ModelParams& params, const corpus::PolarityDocuments& docs,
                               const AttentionMaps* maps) {
  const int P = params.dims.preferred_aspects, R = params.dims.rejected_aspects;
  UserImportance u;
  if (params.variant == Variant::kUniformImportance) {
    u.rho_p = Tensor::full({P}, 1.0 / P);
    u.rho_r = Tensor::full({R}, 1.0 / R);
    u.mu_p = Tensor({P});
    u.mu_r = Tensor({R});
    u.rho_p_plus = u.rho_p;
    u.rho_r_plus = u.rho_r;
    return u;
  }

  const bool merged = params.variant == Variant::kNoPolarity;
  const std::vector<int>& doc_p = merged ? docs.merged : docs.positive;
  const std::vector<int>& doc_r = merged ? docs.merged : docs.negative;
  u.rho_p = extract_importance(params, doc_p, Polarity::kPreferred, params.variant);
  u.rho_r = extract_importance(params, doc_r, Polarity::kRejected, params.variant);

  if (maps == nullptr || params.variant == Variant::kNoOffset) {
    u.mu_p = Tensor({P});
    u.mu_r = Tensor({R});
    u.rho_p_plus = u.rho_p;
    u.rho_r_plus = u.rho_r;
    return u;
  }

  u.mu_r = matvec_t_fw(maps->phi, u.rho_p);
  u.mu_p = matvec_t_fw(maps->psi, u.rho_r);
  u.rho_p_plus = add_fw(u.rho_p, u.mu_p);
  u.rho_r_plus = add_fw(u.rho_r, u.mu_r);
  return u;
}

}  // namespace rpr::model
