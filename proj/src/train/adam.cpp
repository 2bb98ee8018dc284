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
#include <cstddef>

#include "rpr/common.hpp"
#include "rpr/train/train.hpp"

namespace rpr::train {

AdamState make_adam_state(const model::ModelParams& params,
                          std::vector<int> param_ids) {
  AdamState state;
  state.param_ids = std::move(param_ids);
  state.m.reserve(state.param_ids.size());
  state.v.reserve(state.param_ids.size());
  for (int id : state.param_ids) {
    const Tensor& t = params.tensor(id);
    state.m.push_back(Tensor(t.shape()));
    state.v.push_back(Tensor(t.shape()));
  }
  return state;
}

void adam_step(model::ModelParams& params,
               const std::array<Tensor, model::kNumParams>& grads,
               AdamState& state, double learning_rate, double beta1,
               double beta2, double epsilon) {
  state.step += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < state.param_ids.size(); ++k) {
    const int id = state.param_ids[k];
    const Tensor& g = grads[static_cast<std::size_t>(id)];
    if (g.numel() == 0) continue;  // parameter inactive under this variant
    if (!g.all_finite()) {
      throw DivergenceError("non-finite gradient for " +
                            std::string(model::param_name(id)));
    }
    Tensor& theta = params.tensor(id);
    require_same_shape(theta, g, "adam_step");
    double* m = state.m[k].data();
    double* v = state.v[k].data();
    double* p = theta.data();
    const double* gd = g.data();
    const std::size_t n = theta.numel();
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * gd[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * gd[i] * gd[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      p[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + epsilon);
    }
  }
}

double clip_global_norm(std::array<Tensor, model::kNumParams>& grads,
                        double max_norm) {
  double sq = 0.0;
  for (const Tensor& g : grads) {
    const double* d = g.data();
    for (std::size_t i = 0; i < g.numel(); ++i) sq += d[i] * d[i];
  }
  const double norm = std::sqrt(sq);
  if (max_norm <= 0 || norm <= max_norm) return norm;
  const double scale = max_norm / norm;
  for (Tensor& g : grads) {
    double* d = g.data();
    for (std::size_t i = 0; i < g.numel(); ++i) d[i] *= scale;
  }
  return norm;
}

std::vector<std::vector<int>> update_groups(model::ModelKind kind,
                                            bool freeze_embeddings) {
  using model::ParamId;
  std::vector<std::vector<int>> groups;
  groups.push_back({ParamId::kUserFactors});
  groups.push_back({ParamId::kItemFactors});
  if (kind == model::ModelKind::kMf) return groups;
  groups.push_back({ParamId::kPreferredIndicators, ParamId::kRejectedIndicators});
  std::vector<int> network = {
      ParamId::kConvFilters,        ParamId::kConvBias,
      ParamId::kPreferredHeadWeight, ParamId::kPreferredHeadBias,
      ParamId::kRejectedHeadWeight,  ParamId::kRejectedHeadBias,
      ParamId::kAttentionWeight,     ParamId::kAttentionBias,
      ParamId::kAttentionVector};
  if (!freeze_embeddings) network.push_back(ParamId::kWordEmbeddings);
  groups.push_back(std::move(network));
  return groups;
}

}  // namespace rpr::train
