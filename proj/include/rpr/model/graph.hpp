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

#include <array>
#include <string>
#include <vector>

#include "rpr/common.hpp"
#include "rpr/corpus/corpus.hpp"
#include "rpr/model/model.hpp"

namespace rpr::model {

struct ObjectiveConfig {
  double beta1 = 0.0;   // L1 weight on the indicator matrices
  double beta2 = 0.0;   // L2 weight on touched factor rows and the active net
  double dropout = 0.0; // applied after conv and head layers; 0 disables
  Rng* dropout_rng = nullptr;  // required when dropout > 0
  int pad_token = -1;   // embedding row to keep frozen; -1 when absent
};

struct BatchGradients {
  double loss = 0.0;                      // full objective for the batch
  std::vector<double> predictions;        // r_hat per batch example, in order
  std::array<Tensor, kNumParams> grads;   // canonical order; empty = inactive
};

// One training step's forward and backward pass: builds the batch graph on a
// fresh tape, checks the objective is finite, and collects gradients. The
// data term is 0.5 * sum of squared residuals; L1 covers the indicator
// matrices; L2 covers each factor row touched by the batch once plus every
// network parameter the variant's forward pass uses. Embeddings are trained
// but never L2-regularized. Per-user text extraction and the attention maps
// are computed once per batch. Throws DivergenceError naming the first
// non-finite batch example.
BatchGradients forward_backward(const ModelParams& params,
                                const std::vector<corpus::CorpusView::Triple>& batch,
                                const std::vector<corpus::PolarityDocuments>& documents,
                                const ObjectiveConfig& objective);

struct GradcheckTrial {
  uint64_t seed = 0;
  double max_rel_err = 0.0;
  std::string worst_param;
};

struct GradcheckReport {
  std::vector<GradcheckTrial> trials;
  double max_rel_err = 0.0;
  std::string worst_param;
};

// Analytic gradients against central finite differences on small random
// problems (two users, two items, short documents, both regularizers on).
// Instances whose pre-activations sit within 1e-3 of a ReLU kink, or whose
// indicator entries sit that close to zero, are redrawn so the comparison
// stays away from subgradient ambiguity. Relative error uses
// |a - n| / max(|a|, |n|, 1e-8).
GradcheckReport certify_gradients(uint64_t seed, int trials,
                                  Variant variant = Variant::kBase);

}  // namespace rpr::model
