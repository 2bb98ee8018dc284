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

#include "rpr/primitives.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace rpr {

using MatMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

Tensor embed_tokens(const Tensor& table, const std::vector<int>& ids) {
  if (table.rank() != 2) throw ShapeError("embed_tokens: table must be rank 2");
  const int d = table.dim(1);
  const int vocab = table.dim(0);
  Tensor out({static_cast<int>(ids.size()), d});
  for (size_t j = 0; j < ids.size(); ++j) {
    int id = ids[j];
    if (id < 0 || id >= vocab) throw LookupError("embed_tokens: token id out of range");
    std::copy_n(table.data() + static_cast<size_t>(id) * d, d,
                out.data() + j * static_cast<size_t>(d));
  }
  return out;
}

// Marks output rows whose entire context window lies in padding.
static void forced_zero_rows(const std::vector<uint8_t>& pad_rows, int l, int eps,
                             std::vector<uint8_t>& forced) {
  forced.assign(static_cast<size_t>(l), 0);
  for (int j = 0; j < l; ++j) {
    bool all_pad = true;
    for (int o = -eps; o <= eps; ++o) {
      int s = j + o;
      if (s >= 0 && s < l && !pad_rows[static_cast<size_t>(s)]) {
        all_pad = false;
        break;
      }
    }
    forced[static_cast<size_t>(j)] = all_pad ? 1 : 0;
  }
}

Tensor conv_context_fw(const Tensor& E, const Tensor& filters, const Tensor& bias,
                       const std::vector<uint8_t>* pad_rows) {
  if (E.rank() != 2 || filters.rank() != 3 || bias.rank() != 1)
    throw ShapeError("conv_context: bad ranks");
  const int l = E.dim(0), d = E.dim(1);
  const int c = filters.dim(0), n_f = filters.dim(2);
  if (filters.dim(1) != d) throw ShapeError("conv_context: channel mismatch");
  if (bias.dim(0) != n_f) throw ShapeError("conv_context: bias length mismatch");
  if (c % 2 == 0) throw ShapeError("conv_context: kernel width must be odd");
  const int eps = (c - 1) / 2;

  Tensor out({l, n_f});
  if (l == 0) return out;
  for (int j = 0; j < l; ++j)
    for (int k = 0; k < n_f; ++k) out.at(j, k) = bias.at(k);

  ConstMatMap Em(E.data(), l, d);
  MatMap Y(out.data(), l, n_f);
  for (int t = 0; t < c; ++t) {
    const int o = t - eps;
    const int j0 = std::max(0, -o);
    const int j1 = std::min(l, l - o);
    if (j0 >= j1) continue;
    ConstMatMap Ft(filters.data() + static_cast<size_t>(t) * d * n_f, d, n_f);
    Y.middleRows(j0, j1 - j0).noalias() += Em.middleRows(j0 + o, j1 - j0) * Ft;
  }

  if (pad_rows != nullptr) {
    std::vector<uint8_t> forced;
    forced_zero_rows(*pad_rows, l, eps, forced);
    for (int j = 0; j < l; ++j)
      if (forced[static_cast<size_t>(j)])
        for (int k = 0; k < n_f; ++k) out.at(j, k) = 0.0;
  }
  for (size_t i = 0; i < out.numel(); ++i)
    if (out.data()[i] < 0.0) out.data()[i] = 0.0;
  return out;
}

Tensor rows_affine_relu_fw(const Tensor& X, const Tensor& W, const Tensor& b) {
  if (X.rank() != 2 || W.rank() != 2 || b.rank() != 1)
    throw ShapeError("rows_affine_relu: bad ranks");
  const int l = X.dim(0), k = X.dim(1), m = W.dim(0);
  if (W.dim(1) != k || b.dim(0) != m) throw ShapeError("rows_affine_relu: shape mismatch");
  Tensor out({l, m});
  if (l == 0) return out;
  ConstMatMap Xm(X.data(), l, k), Wm(W.data(), m, k);
  MatMap Y(out.data(), l, m);
  Y.noalias() = Xm * Wm.transpose();
  for (int j = 0; j < l; ++j)
    for (int i = 0; i < m; ++i) {
      double v = out.at(j, i) + b.at(i);
      out.at(j, i) = v > 0.0 ? v : 0.0;
    }
  return out;
}

Tensor vec_affine_relu_fw(const Tensor& x, const Tensor& W, const Tensor& b) {
  if (x.rank() != 1 || W.rank() != 2 || b.rank() != 1)
    throw ShapeError("vec_affine_relu: bad ranks");
  const int k = x.dim(0), m = W.dim(0);
  if (W.dim(1) != k || b.dim(0) != m) throw ShapeError("vec_affine_relu: shape mismatch");
  Tensor out({m});
  for (int i = 0; i < m; ++i) {
    double acc = b.at(i);
    for (int j = 0; j < k; ++j) acc += W.at(i, j) * x.at(j);
    out.at(i) = acc > 0.0 ? acc : 0.0;
  }
  return out;
}

Tensor sum_rows_fw(const Tensor& X) {
  if (X.rank() != 2) throw ShapeError("sum_rows: rank 2 required");
  const int l = X.dim(0), m = X.dim(1);
  Tensor out({m});
  for (int j = 0; j < l; ++j)
    for (int i = 0; i < m; ++i) out.at(i) += X.at(j, i);
  return out;
}

Tensor max_rows_fw(const Tensor& X, std::vector<int>* argmax) {
  if (X.rank() != 2) throw ShapeError("max_rows: rank 2 required");
  const int l = X.dim(0), m = X.dim(1);
  Tensor out({m});
  if (argmax != nullptr) argmax->assign(static_cast<size_t>(m), -1);
  for (int i = 0; i < m; ++i) {
    if (l == 0) continue;
    double best = X.at(0, i);
    int arg = 0;
    for (int j = 1; j < l; ++j)
      if (X.at(j, i) > best) {
        best = X.at(j, i);
        arg = j;
      }
    out.at(i) = best;
    if (argmax != nullptr) (*argmax)[static_cast<size_t>(i)] = arg;
  }
  return out;
}

Tensor softmax_fw(const Tensor& v) {
  if (v.rank() != 1) throw ShapeError("softmax: rank 1 required");
  const int n = v.dim(0);
  if (n == 0) throw ShapeError("softmax: empty input");
  Tensor out({n});
  double mx = v.at(0);
  for (int i = 1; i < n; ++i) mx = std::max(mx, v.at(i));
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    out.at(i) = std::exp(v.at(i) - mx);
    z += out.at(i);
  }
  for (int i = 0; i < n; ++i) out.at(i) /= z;
  return out;
}

Tensor softmax_columns_fw(const Tensor& A) {
  if (A.rank() != 2) throw ShapeError("softmax_columns: rank 2 required");
  const int n = A.dim(0), m = A.dim(1);
  if (n == 0) throw ShapeError("softmax_columns: empty columns");
  Tensor out({n, m});
  for (int j = 0; j < m; ++j) {
    double mx = A.at(0, j);
    for (int i = 1; i < n; ++i) mx = std::max(mx, A.at(i, j));
    double z = 0.0;
    for (int i = 0; i < n; ++i) {
      out.at(i, j) = std::exp(A.at(i, j) - mx);
      z += out.at(i, j);
    }
    for (int i = 0; i < n; ++i) out.at(i, j) /= z;
  }
  return out;
}

Tensor transpose_fw(const Tensor& A) {
  if (A.rank() != 2) throw ShapeError("transpose: rank 2 required");
  Tensor out({A.dim(1), A.dim(0)});
  for (int i = 0; i < A.dim(0); ++i)
    for (int j = 0; j < A.dim(1); ++j) out.at(j, i) = A.at(i, j);
  return out;
}

Tensor mul_fw(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "elementwise_product");
  Tensor out = a;
  for (size_t i = 0; i < out.numel(); ++i) out.data()[i] *= b.data()[i];
  return out;
}

Tensor add_fw(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out = a;
  for (size_t i = 0; i < out.numel(); ++i) out.data()[i] += b.data()[i];
  return out;
}

Tensor sub_fw(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out = a;
  for (size_t i = 0; i < out.numel(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

Tensor scale_fw(const Tensor& a, double c) {
  Tensor out = a;
  for (size_t i = 0; i < out.numel(); ++i) out.data()[i] *= c;
  return out;
}

Tensor matvec_t_fw(const Tensor& A, const Tensor& x) {
  if (A.rank() != 2 || x.rank() != 1) throw ShapeError("matvec_t: bad ranks");
  const int n = A.dim(0), m = A.dim(1);
  if (x.dim(0) != n) throw ShapeError("matvec_t: length mismatch");
  Tensor out({m});
  for (int j = 0; j < m; ++j) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += A.at(i, j) * x.at(i);
    out.at(j) = acc;
  }
  return out;
}

Tensor attention_scores_fw(const Tensor& M, const Tensor& V, const Tensor& W, const Tensor& b,
                           const Tensor& h, Tensor* hidden) {
  if (M.rank() != 2 || V.rank() != 2 || M.dim(0) != V.dim(0))
    throw ShapeError("attention_scores: factor dimension mismatch");
  const int f = M.dim(0), P = M.dim(1), R = V.dim(1);
  if (W.rank() != 2 || b.rank() != 1 || h.rank() != 1)
    throw ShapeError("attention_scores: bad net ranks");
  const int hid = W.dim(0);
  if (W.dim(1) != f || b.dim(0) != hid || h.dim(0) != hid)
    throw ShapeError("attention_scores: net shape mismatch");

  if (hidden != nullptr) *hidden = Tensor({P * R, hid});
  Tensor out({P, R});
  for (int x = 0; x < P; ++x)
    for (int y = 0; y < R; ++y) {
      double score = 0.0;
      for (int k = 0; k < hid; ++k) {
        double z = b.at(k);
        for (int j = 0; j < f; ++j) z += W.at(k, j) * V.at(j, y) * M.at(j, x);
        double a = z > 0.0 ? z : 0.0;
        if (hidden != nullptr) hidden->at(x * R + y, k) = a;
        score += h.at(k) * a;
      }
      out.at(x, y) = score;
    }
  return out;
}

double dot_fw(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "dot");
  double acc = 0.0;
  for (size_t i = 0; i < a.numel(); ++i) acc += a.data()[i] * b.data()[i];
  return acc;
}

double l1_sum_fw(const Tensor& a) {
  double acc = 0.0;
  for (size_t i = 0; i < a.numel(); ++i) acc += std::fabs(a.data()[i]);
  return acc;
}

double l2_sum_fw(const Tensor& a) {
  double acc = 0.0;
  for (size_t i = 0; i < a.numel(); ++i) acc += a.data()[i] * a.data()[i];
  return acc;
}

}  // namespace rpr
