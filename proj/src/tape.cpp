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

#include "rpr/tape.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <utility>

namespace rpr {

using MatMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

VarId Tape::push(Tensor v, bool tracked, std::function<void(Tape&)> back) {
  Slot s;
  s.value = std::move(v);
  s.tracked = tracked;
  s.back = std::move(back);
  slots_.push_back(std::move(s));
  return static_cast<VarId>(slots_.size()) - 1;
}

Tensor& Tape::gbuf(VarId id) {
  Slot& s = slots_[static_cast<size_t>(id)];
  if (s.grad.empty()) s.grad = Tensor(s.value.shape());
  return s.grad;
}

VarId Tape::value(Tensor v) { return push(std::move(v), false); }

VarId Tape::param(const Tensor& p, int key) {
  VarId id = push(p, true);
  slots_.back().key = key;
  return id;
}

void Tape::backward(VarId root) {
  if (val(root).numel() != 1) throw ShapeError("backward: root must be scalar");
  gbuf(root).fill(1.0);
  for (VarId i = root; i >= 0; --i) {
    Slot& s = slots_[static_cast<size_t>(i)];
    if (!s.tracked || !s.back || s.grad.empty()) continue;
    s.back(*this);
  }
}

Tensor Tape::grad(VarId id) const {
  const Slot& s = slots_[static_cast<size_t>(id)];
  if (s.grad.empty()) return Tensor(s.value.shape());
  return s.grad;
}

VarId Tape::pick_row(VarId m, int row) {
  const Tensor& M = val(m);
  if (M.rank() != 2) throw ShapeError("pick_row: rank 2 required");
  const int cols = M.dim(1);
  Tensor out({cols});
  std::copy_n(M.data() + static_cast<size_t>(row) * cols, cols, out.data());
  if (!tracked(m)) return push(std::move(out), false);
  VarId self = push(std::move(out), true);
  slots_.back().back = [m, row, cols, self](Tape& t) {
    const Tensor& go = t.slots_[static_cast<size_t>(self)].grad;
    Tensor& g = t.gbuf(m);
    for (int j = 0; j < cols; ++j) g.at(row, j) += go.at(j);
  };
  return self;
}

VarId Tape::embed_rows(VarId table, std::vector<int> ids, int pad_id) {
  Tensor out = embed_tokens(val(table), ids);
  if (!tracked(table)) return push(std::move(out), false);
  const int d = val(table).dim(1);
  VarId self = push(std::move(out), true);
  slots_.back().back = [table, ids = std::move(ids), pad_id, d, self](Tape& t) {
    const Tensor& go = t.slots_[static_cast<size_t>(self)].grad;
    Tensor& g = t.gbuf(table);
    for (size_t j = 0; j < ids.size(); ++j) {
      if (ids[j] == pad_id) continue;  // pad embedding stays frozen
      double* dst = g.data() + static_cast<size_t>(ids[j]) * d;
      const double* src = go.data() + j * static_cast<size_t>(d);
      for (int k = 0; k < d; ++k) dst[k] += src[k];
    }
  };
  return self;
}

VarId Tape::conv_context(VarId E, VarId filters, VarId bias, std::vector<uint8_t> pad_rows) {
  Tensor out = conv_context_fw(val(E), val(filters), val(bias),
                               pad_rows.empty() ? nullptr : &pad_rows);
  bool tr = tracked(E) || tracked(filters) || tracked(bias);
  if (!tr) return push(std::move(out), false);
  VarId self = push(std::move(out), true);
  slots_.back().back = [E, filters, bias, self](Tape& t) {
    const Tensor& Y = t.val(self);
    const Tensor& go = t.slots_[static_cast<size_t>(self)].grad;
    const Tensor& Ev = t.val(E);
    const Tensor& Fv = t.val(filters);
    const int l = Ev.dim(0), d = Ev.dim(1);
    const int c = Fv.dim(0), n_f = Fv.dim(2);
    const int eps = (c - 1) / 2;
    if (l == 0) return;
    // Upstream gradient gated by the ReLU; forced-zero rows have Y == 0 and
    // therefore pass nothing.
    Tensor dA({l, n_f});
    for (int j = 0; j < l; ++j)
      for (int k = 0; k < n_f; ++k) dA.at(j, k) = Y.at(j, k) > 0.0 ? go.at(j, k) : 0.0;
    ConstMatMap dAm(dA.data(), l, n_f);
    ConstMatMap Em(Ev.data(), l, d);
    if (t.tracked(bias)) {
      Tensor& gb = t.gbuf(bias);
      for (int j = 0; j < l; ++j)
        for (int k = 0; k < n_f; ++k) gb.at(k) += dA.at(j, k);
    }
    for (int tt = 0; tt < c; ++tt) {
      const int o = tt - eps;
      const int j0 = std::max(0, -o);
      const int j1 = std::min(l, l - o);
      if (j0 >= j1) continue;
      if (t.tracked(filters)) {
        MatMap gF(t.gbuf(filters).data() + static_cast<size_t>(tt) * d * n_f, d, n_f);
        gF.noalias() += Em.middleRows(j0 + o, j1 - j0).transpose() * dAm.middleRows(j0, j1 - j0);
      }
      if (t.tracked(E)) {
        ConstMatMap Ft(Fv.data() + static_cast<size_t>(tt) * d * n_f, d, n_f);
        MatMap gE(t.gbuf(E).data(), l, d);
        gE.middleRows(j0 + o, j1 - j0).noalias() +=
            dAm.middleRows(j0, j1 - j0) * Ft.transpose();
      }
    }
  };
  return self;
}

VarId Tape::rows_affine_relu(VarId X, VarId W, VarId b) {
  Tensor out = rows_affine_relu_fw(val(X), val(W), val(b));
  bool tr = tracked(X) || tracked(W) || tracked(b);
  if (!tr) return push(std::move(out), false);
  VarId self = push(std::move(out), true);
  slots_.back().back = [X, W, b, self](Tape& t) {
    const Tensor& Y = t.val(self);
    const Tensor& go = t.slots_[static_cast<size_t>(self)].grad;
    const Tensor& Xv = t.val(X);
    const Tensor& Wv = t.val(W);
    const int l = Xv.dim(0), k = Xv.dim(1), m = Wv.dim(0);
    if (l == 0) return;
    Tensor dZ({l, m});
    for (int j = 0; j < l; ++j)
      for (int i = 0; i < m; ++i) dZ.at(j, i) = Y.at(j, i) > 0.0 ? go.at(j, i) : 0.0;
    ConstMatMap dZm(dZ.data(), l, m);
    ConstMatMap Xm(Xv.data(), l, k), Wm(Wv.data(), m, k);
    if (t.tracked(X)) {
      MatMap gX(t.gbuf(X).data(), l, k);
      gX.noalias() += dZm * Wm;
    }
    if (t.tracked(W)) {
      MatMap gW(t.gbuf(W).data(), m, k);
      gW.noalias() += dZm.transpose() * Xm;
    }
    if (t.tracked(b)) {
      Tensor& gb = t.gbuf(b);
      for (int j = 0; j < l; ++j)
        for (int i = 0; i < m; ++i) gb.at(i) += dZ.at(j, i);
    }
  };
  return self;
}

VarId Tape::vec_affine_relu(VarId x, VarId W, VarId b) {
  Tensor out = vec_affine_relu_fw(val(x), val(W), val(b));
  bool tr = tracked(x) || tracked(W) || tracked(b);
  if (!tr) return push(std::move(out), false);
  VarId self = push(std::move(out), true);
  slots_.back().back = [x, W, b, self](Tape& t) {
    const Tensor& y = t.val(self);
    const Tensor& go = t.slots_[static_cast<size_t>(self)].grad;
    const Tensor& xv = t.val(x);
    const Tensor& Wv = t.val(W);
    const int k = xv.dim(0), m = Wv.dim(0);
    Tensor dz({m});
    for (int i = 0; i < m; ++i) dz.at(i) = y.at(i) > 0.0 ? go.at(i) : 0.0;
    if (t.tracked(b)) {
      Tensor& gb = t.gbuf(b);
      for (int i = 0; i < m; ++i) gb.at(i) += dz.at(i);
    }
    if (t.tracked(W)) {
      Tensor& gW = t.gbuf(W);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < k; ++j) gW.at(i, j) += dz.at(i) * xv.at(j);
    }
    if (t.tracked(x)) {
      Tensor& gx = t.gbuf(x);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < k; ++j) gx.at(j) += Wv.at(i, j) * dz.at(i);
    }
  };
  return self;
}

VarId Tape::sum_rows(VarId X) {
  Tensor out = sum_rows_fw(val(X));
  if (!tracked(X)) return push(std::move(out), false);
  VarId self = push(std::move(out), true);
  slots_.back().back = [X, self](Tape& t) {
    const Tensor& go = t.slots_[static_cast<size_t>(self)].grad;
    Tensor& g = t.gbuf(X);
    const int l = g.dim(0), m = g.dim(1);
    for (int j = 0; j < l; ++j)
      for (int i = 0; i < m; ++i) g.at(j, i) += go.at(i);
  };
  return self;
}

VarId Tape::max_rows(VarId X) {
  std::vector<int> argmax;
  Tensor out = max_rows_fw(val(X), &argmax);
  if (!tracked(X)) return push(std::move(out), false);
  VarId self = push(std::move(out), true);
  slots_.back().back = [X, argmax = std::move(argmax), self](Tape& t) {
    const Tensor& go = t.slots_[static_cast<size_t>(self)].grad;
    Tensor& g = t.gbuf(X);
    for (size_t i = 0; i < argmax.size(); ++i)
      if (argmax[i] >= 0) g.at(argmax[i], static_cast<int>(i)) += go.at(static_cast<int>(i));
  };
  return self;
}

VarId Tape::softmax(VarId v) {
  Tensor out = softmax_fw(val(v));
  if (!tracked(v)) return push(std::move(out), false);
  VarId self = push(std::move(out), true);
  slots_.back().back = [v, self](Tape& t) {
    const Tensor& s = t.val(self);
    const Tensor& go = t.slots_[static_cast<size_t>(self)].grad;
    Tensor& g = t.gbuf(v);
    const int n = s.dim(0);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += s.at(i) * go.at(i);
    for (int i = 0; i < n; ++i) g.at(i) += s.at(i) * (go.at(i) - acc);
  };
  return self;
}

VarId Tape::softmax_columns(VarId A) {
  Tensor out = softmax_columns_fw(val(A));
  if (!tracked(A)) return push(std::move(out), false);
  VarId self = push(std::move(out), true);
  slots_.back().back = [A, self](Tape& t) {
    const Tensor& S = t.val(self);
    const Tensor& go = t.slots_[static_cast<size_t>(self)].grad;
    Tensor& g = t.gbuf(A);
    const int n = S.dim(0), m = S.dim(1);
    for (int j = 0; j < m; ++j) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += S.at(i, j) * go.at(i, j);
      for (int i = 0; i < n; ++i) g.at(i, j) += S.at(i, j) * (go.at(i, j) - acc);
    }
  };
  return self;
}

VarId Tape::transpose(VarId A) {
  Tensor out = transpose_fw(val(A));
  if (!tracked(A)) return push(std::move(out), false);
  VarId self = push(std::move(out), true);
  slots_.back().back = [A, self](Tape& t) {
    const Tensor& go = t.slots_[static_cast<size_t>(self)].grad;
    Tensor& g = t.gbuf(A);
    for (int i = 0; i < g.dim(0); ++i)
      for (int j = 0; j < g.dim(1); ++j) g.at(i, j) += go.at(j, i);
  };
  return self;
}

VarId Tape::mul(VarId a, VarId b) {
  Tensor out = mul_fw(val(a), val(b));
  bool tr = tracked(a) || tracked(b);
  if (!tr) return push(std::move(out), false);
  VarId self = push(std::move(out), true);
  slots_.back().back = [a, b, self](Tape& t) {
    const Tensor& go = t.slots_[static_cast<size_t>(self)].grad;
    if (t.tracked(a)) {
      const Tensor& bv = t.val(b);
      Tensor& g = t.gbuf(a);
      for (size_t i = 0; i < g.numel(); ++i) g.data()[i] += go.data()[i] * bv.data()[i];
    }
    if (t.tracked(b)) {
      const Tensor& av = t.val(a);
      Tensor& g = t.gbuf(b);
      for (size_t i = 0; i < g.numel(); ++i) g.data()[i] += go.data()[i] * av.data()[i];
    }
  };
  return self;
}

VarId Tape::add(VarId a, VarId b) {
  Tensor out = add_fw(val(a), val(b));
  bool tr = tracked(a) || tracked(b);
  if (!tr) return push(std::move(out), false);
  VarId self = push(std::move(out), true);
  slots_.back().back = [a, b, self](Tape& t) {
    const Tensor& go = t.slots_[static_cast<size_t>(self)].grad;
    if (t.tracked(a)) {
      Tensor& g = t.gbuf(a);
      for (size_t i = 0; i < g.numel(); ++i) g.data()[i] += go.data()[i];
    }
    if (t.tracked(b)) {
      Tensor& g = t.gbuf(b);
      for (size_t i = 0; i < g.numel(); ++i) g.data()[i] += go.data()[i];
    }
  };
  return self;
}

VarId Tape::sub(VarId a, VarId b) {
  Tensor out = sub_fw(val(a), val(b));
  bool tr = tracked(a) || tracked(b);
  if (!tr) return push(std::move(out), false);
  VarId self = push(std::move(out), true);
  slots_.back().back = [a, b, self](Tape& t) {
    const Tensor& go = t.slots_[static_cast<size_t>(self)].grad;
    if (t.tracked(a)) {
      Tensor& g = t.gbuf(a);
      for (size_t i = 0; i < g.numel(); ++i) g.data()[i] += go.data()[i];
    }
    if (t.tracked(b)) {
      Tensor& g = t.gbuf(b);
      for (size_t i = 0; i < g.numel(); ++i) g.data()[i] -= go.data()[i];
    }
  };
  return self;
}

VarId Tape::scale(VarId a, double c) {
  Tensor out = scale_fw(val(a), c);
  if (!tracked(a)) return push(std::move(out), false);
  VarId self = push(std::move(out), true);
  slots_.back().back = [a, c, self](Tape& t) {
    const Tensor& go = t.slots_[static_cast<size_t>(self)].grad;
    Tensor& g = t.gbuf(a);
    for (size_t i = 0; i < g.numel(); ++i) g.data()[i] += c * go.data()[i];
  };
  return self;
}

VarId Tape::matvec_t(VarId A, VarId x) {
  Tensor out = matvec_t_fw(val(A), val(x));
  bool tr = tracked(A) || tracked(x);
  if (!tr) return push(std::move(out), false);
  VarId self = push(std::move(out), true);
  slots_.back().back = [A, x, self](Tape& t) {
    const Tensor& go = t.slots_[static_cast<size_t>(self)].grad;
    const Tensor& Av = t.val(A);
    const Tensor& xv = t.val(x);
    const int n = Av.dim(0), m = Av.dim(1);
    if (t.tracked(A)) {
      Tensor& g = t.gbuf(A);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) g.at(i, j) += xv.at(i) * go.at(j);
    }
    if (t.tracked(x)) {
      Tensor& g = t.gbuf(x);
      for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < m; ++j) acc += Av.at(i, j) * go.at(j);
        g.at(i) += acc;
      }
    }
  };
  return self;
}

VarId Tape::dot(VarId a, VarId b) {
  Tensor out = Tensor::scalar(dot_fw(val(a), val(b)));
  bool tr = tracked(a) || tracked(b);
  if (!tr) return push(std::move(out), false);
  VarId self = push(std::move(out), true);
  slots_.back().back = [a, b, self](Tape& t) {
    const double g = t.slots_[static_cast<size_t>(self)].grad.data()[0];
    if (t.tracked(a)) {
      const Tensor& bv = t.val(b);
      Tensor& ga = t.gbuf(a);
      for (size_t i = 0; i < ga.numel(); ++i) ga.data()[i] += g * bv.data()[i];
    }
    if (t.tracked(b)) {
      const Tensor& av = t.val(a);
      Tensor& gb = t.gbuf(b);
      for (size_t i = 0; i < gb.numel(); ++i) gb.data()[i] += g * av.data()[i];
    }
  };
  return self;
}

VarId Tape::attention_scores(VarId M, VarId V, VarId W, VarId b, VarId h) {
  Tensor hidden;
  Tensor out = attention_scores_fw(val(M), val(V), val(W), val(b), val(h), &hidden);
  const int f = val(M).dim(0), P = val(M).dim(1), R = val(V).dim(1);
  const int hid = val(W).dim(0);

  bool tr = tracked(M) || tracked(V) || tracked(W) || tracked(b) || tracked(h);
  if (!tr) return push(std::move(out), false);
  VarId self = push(std::move(out), true);
  slots_.back().back = [M, V, W, b, h, hidden = std::move(hidden), f, P, R, hid, self](Tape& t) {
    const Tensor& go = t.slots_[static_cast<size_t>(self)].grad;
    const Tensor& Mv = t.val(M);
    const Tensor& Vv = t.val(V);
    const Tensor& Wv = t.val(W);
    const Tensor& hv = t.val(h);
    for (int x = 0; x < P; ++x)
      for (int y = 0; y < R; ++y) {
        const double g = go.at(x, y);
        if (g == 0.0) continue;
        const int row = x * R + y;
        for (int k = 0; k < hid; ++k) {
          const double a = hidden.at(row, k);
          if (t.tracked(h)) t.gbuf(h).at(k) += g * a;
          if (a <= 0.0) continue;
          const double dz = g * hv.at(k);
          if (t.tracked(b)) t.gbuf(b).at(k) += dz;
          for (int j = 0; j < f; ++j) {
            const double u = Vv.at(j, y) * Mv.at(j, x);
            if (t.tracked(W)) t.gbuf(W).at(k, j) += dz * u;
            const double du = Wv.at(k, j) * dz;
            if (t.tracked(V)) t.gbuf(V).at(j, y) += du * Mv.at(j, x);
            if (t.tracked(M)) t.gbuf(M).at(j, x) += du * Vv.at(j, y);
          }
        }
      }
  };
  return self;
}

VarId Tape::dropout(VarId x, double rate, Rng& rng) {
  const Tensor& xv = val(x);
  if (rate <= 0.0) return x;
  if (rate >= 1.0) throw ConfigError("dropout rate must be < 1");
  Tensor mask(xv.shape());
  const double keep = 1.0 / (1.0 - rate);
  for (size_t i = 0; i < mask.numel(); ++i)
    mask.data()[i] = rng.uniform() >= rate ? keep : 0.0;
  Tensor out = mul_fw(xv, mask);
  if (!tracked(x)) return push(std::move(out), false);
  VarId self = push(std::move(out), true);
  slots_.back().back = [x, mask = std::move(mask), self](Tape& t) {
    const Tensor& go = t.slots_[static_cast<size_t>(self)].grad;
    Tensor& g = t.gbuf(x);
    for (size_t i = 0; i < g.numel(); ++i) g.data()[i] += go.data()[i] * mask.data()[i];
  };
  return self;
}

VarId Tape::l1_sum(VarId a) {
  Tensor out = Tensor::scalar(l1_sum_fw(val(a)));
  if (!tracked(a)) return push(std::move(out), false);
  VarId self = push(std::move(out), true);
  slots_.back().back = [a, self](Tape& t) {
    const double g = t.slots_[static_cast<size_t>(self)].grad.data()[0];
    const Tensor& av = t.val(a);
    Tensor& ga = t.gbuf(a);
    for (size_t i = 0; i < ga.numel(); ++i) {
      const double v = av.data()[i];
      ga.data()[i] += g * (v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0));
    }
  };
  return self;
}

VarId Tape::l2_sum(VarId a) {
  Tensor out = Tensor::scalar(l2_sum_fw(val(a)));
  if (!tracked(a)) return push(std::move(out), false);
  VarId self = push(std::move(out), true);
  slots_.back().back = [a, self](Tape& t) {
    const double g = t.slots_[static_cast<size_t>(self)].grad.data()[0];
    const Tensor& av = t.val(a);
    Tensor& ga = t.gbuf(a);
    for (size_t i = 0; i < ga.numel(); ++i) ga.data()[i] += 2.0 * g * av.data()[i];
  };
  return self;
}

}  // namespace rpr
