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
#include <vector>

#include "rpr/tensor.hpp"

namespace rpr {

// Forward kernels shared by the autodiff tape and the plain inference path,
// so both produce bit-identical values. Matrix products go through Eigen;
// explicit reductions accumulate sequentially left to right.

// Gather embedding rows: table (V x d), ids in [0, V) -> (l x d).
Tensor embed_tokens(const Tensor& table, const std::vector<int>& ids);

// Convolution over symmetric context windows with fused bias and ReLU.
// E (l x d), filters (c, d, n_f) with odd width c, bias (n_f) -> (l x n_f).
// The document is implicitly zero-padded by (c-1)/2 on each side. When
// pad_rows is given (one flag per input position), output rows whose whole
// window consists of padding are forced to zero.
Tensor conv_context_fw(const Tensor& E, const Tensor& filters, const Tensor& bias,
                       const std::vector<uint8_t>* pad_rows = nullptr);

// Row-wise affine map plus ReLU: X (l x k), W (m x k), b (m) -> (l x m).
Tensor rows_affine_relu_fw(const Tensor& X, const Tensor& W, const Tensor& b);

// Vector affine map plus ReLU: x (k), W (m x k), b (m) -> (m).
Tensor vec_affine_relu_fw(const Tensor& x, const Tensor& W, const Tensor& b);

// Column sums over rows, left to right: (l x m) -> (m).
Tensor sum_rows_fw(const Tensor& X);

// Per-column maximum over rows; first maximum wins. argmax (if given)
// receives the winning row per column, -1 when there are no rows.
Tensor max_rows_fw(const Tensor& X, std::vector<int>* argmax = nullptr);

// Max-shifted softmax of a vector.
Tensor softmax_fw(const Tensor& v);

// Column-wise max-shifted softmax of a matrix.
Tensor softmax_columns_fw(const Tensor& A);

Tensor transpose_fw(const Tensor& A);

// Elementwise product; shapes must match.
Tensor mul_fw(const Tensor& a, const Tensor& b);
Tensor add_fw(const Tensor& a, const Tensor& b);
Tensor sub_fw(const Tensor& a, const Tensor& b);
Tensor scale_fw(const Tensor& a, double c);

// A^T x: A (n x m), x (n) -> (m).
Tensor matvec_t_fw(const Tensor& A, const Tensor& x);

// Pairwise two-layer attention scores between indicator columns:
// out(x, y) = h . relu(W (v_y * m_x) + b), M (f x P), V (f x R) -> (P x R).
// hidden (if given) receives the (P*R x hid) post-ReLU activations, row
// x * R + y; the tape keeps them for the backward pass.
Tensor attention_scores_fw(const Tensor& M, const Tensor& V, const Tensor& W, const Tensor& b,
                           const Tensor& h, Tensor* hidden = nullptr);

double dot_fw(const Tensor& a, const Tensor& b);
double l1_sum_fw(const Tensor& a);
double l2_sum_fw(const Tensor& a);

}  // namespace rpr
