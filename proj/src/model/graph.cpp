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
#include <unordered_map>
#include <vector>

#include "rpr/model/graph.hpp"
#include "rpr/tape.hpp"

namespace rpr::model {

namespace {

struct UserNode {
  VarId rho_p_plus = -1;
  VarId rho_r_plus = -1;
  VarId factor_row = -1;
};

// Records one polarity document's importance extraction. Empty documents
// contribute a constant uniform vector: the pre-softmax sum of zero rows is
// the zero vector, which carries no gradient.
VarId record_extraction(Tape& tape, const ModelParams& params, const ObjectiveConfig& obj,
                        const std::vector<int>& doc, VarId emb, VarId filters, VarId conv_bias,
                        VarId head_w, VarId head_b, int aspects) {
  if (doc.empty()) return tape.value(Tensor::full({aspects}, 1.0 / aspects));
  VarId E = tape.embed_rows(emb, doc, obj.pad_token);
  VarId C = tape.conv_context(E, filters, conv_bias);
  if (obj.dropout > 0.0) C = tape.dropout(C, obj.dropout, *obj.dropout_rng);
  if (params.variant == Variant::kCoarseGrained) {
    VarId pooled = tape.max_rows(C);
    VarId z = tape.vec_affine_relu(pooled, head_w, head_b);
    if (obj.dropout > 0.0) z = tape.dropout(z, obj.dropout, *obj.dropout_rng);
    return tape.softmax(z);
  }
  VarId H = tape.rows_affine_relu(C, head_w, head_b);
  if (obj.dropout > 0.0) H = tape.dropout(H, obj.dropout, *obj.dropout_rng);
  return tape.softmax(tape.sum_rows(H));
}

}  // namespace

BatchGradients forward_backward(const ModelParams& params,
                                const std::vector<corpus::CorpusView::Triple>& batch,
                                const std::vector<corpus::PolarityDocuments>& documents,
                                const ObjectiveConfig& obj) {
  if (batch.empty()) throw ConfigError("forward_backward: empty batch");
  if (obj.dropout > 0.0 && obj.dropout_rng == nullptr)
    throw ConfigError("forward_backward: dropout requires an rng");

  const bool rpr = params.kind == ModelKind::kRpr;
  const bool text = rpr && params.variant != Variant::kUniformImportance;
  const bool offset = text && params.variant != Variant::kNoOffset;

  Tape tape;
  std::array<VarId, kNumParams> pv;
  pv.fill(-1);
  for (int id : params.active_params()) pv[static_cast<size_t>(id)] = tape.param(params.tensor(id), id);

  // Attention maps are global: one computation serves the whole batch.
  VarId phi = -1, psi = -1;
  if (offset) {
    VarId logits = tape.attention_scores(pv[kPreferredIndicators], pv[kRejectedIndicators],
                                         pv[kAttentionWeight], pv[kAttentionBias],
                                         pv[kAttentionVector]);
    phi = tape.softmax_columns(logits);
    psi = tape.softmax_columns(tape.transpose(logits));
  }

  const int P = params.dims.preferred_aspects, R = params.dims.rejected_aspects;
  std::unordered_map<int, UserNode> users;
  std::unordered_map<int, VarId> items;
  std::vector<int> user_order, item_order;
  users.reserve(batch.size());
  items.reserve(batch.size());

  for (const auto& t : batch) {
    if (users.emplace(t.user, UserNode{}).second) user_order.push_back(t.user);
    if (items.emplace(t.item, -1).second) item_order.push_back(t.item);
  }

  for (int u : user_order) {
    UserNode& node = users[u];
    node.factor_row = tape.pick_row(pv[kUserFactors], u);
    if (!rpr) continue;
    if (!text) {
      node.rho_p_plus = tape.value(Tensor::full({P}, 1.0 / P));
      node.rho_r_plus = tape.value(Tensor::full({R}, 1.0 / R));
      continue;
    }
    if (static_cast<size_t>(u) >= documents.size())
      throw LookupError("forward_backward: no documents for user " + std::to_string(u));
    const auto& docs = documents[static_cast<size_t>(u)];
    const bool merged = params.variant == Variant::kNoPolarity;
    VarId rho_p = record_extraction(tape, params, obj, merged ? docs.merged : docs.positive,
                                    pv[kWordEmbeddings], pv[kConvFilters], pv[kConvBias],
                                    pv[kPreferredHeadWeight], pv[kPreferredHeadBias], P);
    VarId rho_r = record_extraction(tape, params, obj, merged ? docs.merged : docs.negative,
                                    pv[kWordEmbeddings], pv[kConvFilters], pv[kConvBias],
                                    pv[kRejectedHeadWeight], pv[kRejectedHeadBias], R);
    if (offset) {
      VarId mu_r = tape.matvec_t(phi, rho_p);
      VarId mu_p = tape.matvec_t(psi, rho_r);
      node.rho_p_plus = tape.add(rho_p, mu_p);
      node.rho_r_plus = tape.add(rho_r, mu_r);
    } else {
      node.rho_p_plus = rho_p;
      node.rho_r_plus = rho_r;
    }
  }
  for (int i : item_order) items[i] = tape.pick_row(pv[kItemFactors], i);

  BatchGradients out;
  out.predictions.reserve(batch.size());
  VarId data_acc = -1;
  for (size_t k = 0; k < batch.size(); ++k) {
    const auto& t = batch[k];
    const UserNode& node = users[t.user];
    VarId rhat;
    if (rpr) {
      VarId h = tape.mul(node.factor_row, items[t.item]);
      VarId s_p = tape.matvec_t(pv[kPreferredIndicators], h);
      VarId s_r = tape.matvec_t(pv[kRejectedIndicators], h);
      rhat = tape.sub(tape.dot(node.rho_p_plus, s_p), tape.dot(node.rho_r_plus, s_r));
    } else {
      rhat = tape.dot(node.factor_row, items[t.item]);
    }
    const double pred = tape.val(rhat).value();
    if (!std::isfinite(pred))
      throw DivergenceError("non-finite prediction at batch example " + std::to_string(k));
    out.predictions.push_back(pred);
    VarId res = tape.sub(tape.value(Tensor::scalar(t.rating)), rhat);
    VarId sq = tape.mul(res, res);
    data_acc = k == 0 ? sq : tape.add(data_acc, sq);
  }
  VarId loss = tape.scale(data_acc, 0.5);

  if (rpr && obj.beta1 > 0.0) {
    VarId l1 = tape.add(tape.l1_sum(pv[kPreferredIndicators]), tape.l1_sum(pv[kRejectedIndicators]));
    loss = tape.add(loss, tape.scale(l1, obj.beta1));
  }
  if (obj.beta2 > 0.0) {
    // Touched factor rows enter once each regardless of how many batch
    // examples share them; network weights enter when the variant's forward
    // pass uses them. Embeddings are deliberately left out.
    VarId l2 = -1;
    auto accumulate = [&](VarId term) { l2 = l2 < 0 ? term : tape.add(l2, term); };
    for (int u : user_order) accumulate(tape.l2_sum(users[u].factor_row));
    for (int i : item_order) accumulate(tape.l2_sum(items[i]));
    if (text) {
      accumulate(tape.l2_sum(pv[kConvFilters]));
      accumulate(tape.l2_sum(pv[kConvBias]));
      accumulate(tape.l2_sum(pv[kPreferredHeadWeight]));
      accumulate(tape.l2_sum(pv[kPreferredHeadBias]));
      accumulate(tape.l2_sum(pv[kRejectedHeadWeight]));
      accumulate(tape.l2_sum(pv[kRejectedHeadBias]));
    }
    if (offset) {
      accumulate(tape.l2_sum(pv[kAttentionWeight]));
      accumulate(tape.l2_sum(pv[kAttentionBias]));
      accumulate(tape.l2_sum(pv[kAttentionVector]));
    }
    loss = tape.add(loss, tape.scale(l2, obj.beta2 / 2.0));
  }

  out.loss = tape.val(loss).value();
  if (!std::isfinite(out.loss)) throw DivergenceError("non-finite batch loss");

  tape.backward(loss);
  for (int id : params.active_params())
    out.grads[static_cast<size_t>(id)] = tape.grad(pv[static_cast<size_t>(id)]);
  return out;
}

}  // namespace rpr::model
