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

#include <functional>
#include <vector>

#include "rpr/common.hpp"
#include "rpr/primitives.hpp"
#include "rpr/tensor.hpp"

namespace rpr {

using VarId = int;

// Reverse-mode tape. Operations append slots in topological order; backward
// replays them in reverse, accumulating gradients into the slots of their
// inputs. Leaves registered through param() carry a caller-chosen key so
// gradients can be collected by parameter identity afterwards. A tape is
// built fresh per step and replay is deterministic: identical inputs produce
// bit-identical gradients.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Constant leaf; no gradient is tracked through it.
  VarId value(Tensor v);
  // Differentiable leaf bound to a parameter key (>= 0).
  VarId param(const Tensor& p, int key);

  VarId pick_row(VarId m, int row);
  // ids index into the embedding table; the pad row stays frozen.
  VarId embed_rows(VarId table, std::vector<int> ids, int pad_id);
  VarId conv_context(VarId E, VarId filters, VarId bias, std::vector<uint8_t> pad_rows = {});
  VarId rows_affine_relu(VarId X, VarId W, VarId b);
  VarId vec_affine_relu(VarId x, VarId W, VarId b);
  VarId sum_rows(VarId X);
  VarId max_rows(VarId X);
  VarId softmax(VarId v);
  VarId softmax_columns(VarId A);
  VarId transpose(VarId A);
  VarId mul(VarId a, VarId b);
  VarId add(VarId a, VarId b);
  VarId sub(VarId a, VarId b);
  VarId scale(VarId a, double c);
  VarId matvec_t(VarId A, VarId x);
  VarId dot(VarId a, VarId b);
  // Pairwise attention scores: out(x, y) = h . relu(W (v_y * m_x) + b),
  // M (f x P), V (f x R) -> (P x R).
  VarId attention_scores(VarId M, VarId V, VarId W, VarId b, VarId h);
  // Inverted dropout with a fixed mask drawn at record time.
  VarId dropout(VarId x, double rate, Rng& rng);
  VarId l1_sum(VarId a);  // subgradient at zero is zero
  VarId l2_sum(VarId a);

  const Tensor& val(VarId id) const { return slots_[static_cast<size_t>(id)].value; }
  bool tracked(VarId id) const { return slots_[static_cast<size_t>(id)].tracked; }
  int param_key(VarId id) const { return slots_[static_cast<size_t>(id)].key; }
  size_t size() const { return slots_.size(); }

  // Seeds d(root)/d(root) = 1 and propagates. root must be scalar.
  void backward(VarId root);

  // Gradient of the last backward() root with respect to slot id; a zero
  // tensor of the slot's shape when no gradient reached it.
  Tensor grad(VarId id) const;

 private:
  struct Slot {
    Tensor value;
    Tensor grad;  // empty until first accumulation
    bool tracked = false;
    int key = -1;
    std::function<void(Tape&)> back;
  };

  VarId push(Tensor v, bool tracked, std::function<void(Tape&)> back = nullptr);
  Tensor& gbuf(VarId id);
  bool has_grad(VarId id) const { return !slots_[static_cast<size_t>(id)].grad.empty(); }

  std::vector<Slot> slots_;
};

}  // namespace rpr
