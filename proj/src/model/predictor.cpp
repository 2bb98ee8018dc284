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

#include <string>
#include <utility>

#include "rpr/model/model.hpp"
#include "rpr/primitives.hpp"

namespace rpr::model {

Predictor::Predictor(const ModelParams& params, const corpus::CorpusView& view)
    : params_(params), view_(view) {
  if (params_.kind == ModelKind::kRpr && params_.variant != Variant::kUniformImportance &&
      params_.variant != Variant::kNoOffset) {
    maps_ = attention_maps(params_);
    has_maps_ = true;
  }
}

void Predictor::override_attention(Tensor phi, Tensor psi) {
  maps_.phi = std::move(phi);
  maps_.psi = std::move(psi);
  has_maps_ = true;
  cache_.clear();
}

const UserImportance& Predictor::importance(int user) {
  auto it = cache_.find(user);
  if (it != cache_.end()) return it->second;
  if (user < 0 || user >= params_.dims.n_users)
    throw LookupError("unknown user index " + std::to_string(user));
  if (static_cast<size_t>(user) >= view_.documents.size())
    throw LookupError("no documents for user index " + std::to_string(user));
  UserImportance imp = user_importance(params_, view_.documents[static_cast<size_t>(user)],
                                       has_maps_ ? &maps_ : nullptr);
  return cache_.emplace(user, std::move(imp)).first->second;
}

AspectProfile Predictor::profile(int user, int item) {
  if (user < 0 || user >= params_.dims.n_users)
    throw LookupError("unknown user index " + std::to_string(user));
  if (item < 0 || item >= params_.dims.n_items)
    throw LookupError("unknown item index " + std::to_string(item));

  AspectProfile prof;
  Tensor p_u({params_.dims.latent_dim});
  Tensor q_i({params_.dims.latent_dim});
  for (int j = 0; j < params_.dims.latent_dim; ++j) {
    p_u.at(j) = params_.user_factors.at(user, j);
    q_i.at(j) = params_.item_factors.at(item, j);
  }

  if (params_.kind == ModelKind::kMf) {
    prof.positive_term = dot_fw(p_u, q_i);
    prof.r_hat = prof.positive_term;
    return prof;
  }

  const UserImportance& imp = importance(user);
  prof.rho_p = imp.rho_p;
  prof.rho_r = imp.rho_r;
  prof.mu_p = imp.mu_p;
  prof.mu_r = imp.mu_r;
  prof.rho_p_plus = imp.rho_p_plus;
  prof.rho_r_plus = imp.rho_r_plus;

  Tensor h = mul_fw(p_u, q_i);
  prof.s_p = matvec_t_fw(params_.preferred_indicators, h);
  prof.s_r = matvec_t_fw(params_.rejected_indicators, h);
  prof.positive_term = dot_fw(prof.rho_p_plus, prof.s_p);
  prof.negative_term = dot_fw(prof.rho_r_plus, prof.s_r);
  prof.r_hat = prof.positive_term - prof.negative_term;
  return prof;
}

double Predictor::predict(int user, int item) { return profile(user, item).r_hat; }

}  // namespace rpr::model
