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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "doctest.h"
#include "rpr/common.hpp"
#include "rpr/finite_diff.hpp"
#include "rpr/primitives.hpp"
#include "rpr/tape.hpp"
#include "rpr/tensor.hpp"

using rpr::Rng;
using rpr::Tape;
using rpr::Tensor;
using rpr::VarId;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (size_t i = 0; i < t.numel(); ++i) t.data()[i] = rng.uniform(lo, hi);
  return t;
}

// Reduces an op output to a scalar root. Rank-2 outputs are weighted
// elementwise before the row reduction so gradients that land on permuted or
// transposed coordinates cannot cancel out.
VarId scalarize(Tape& tape, VarId out, Rng& rng) {
  // Copy the shape up front: pushing nodes may reallocate the tape's slots,
  // so a reference returned by val() must not be read after that.
  const std::vector<int> shape = tape.val(out).shape();
  if (shape.empty()) return out;
  if (shape.size() == 1) {
    Tensor w = random_tensor({shape[0]}, rng);
    return tape.dot(out, tape.value(w));
  }
  REQUIRE(shape.size() == 2);
  Tensor w = random_tensor({shape[0], shape[1]}, rng);
  VarId weighted = tape.mul(out, tape.value(w));
  VarId cols = tape.sum_rows(weighted);
  Tensor w2 = random_tensor({shape[1]}, rng);
  return tape.dot(cols, tape.value(w2));
}

// Builds the graph twice, once for the analytic tape gradient and once per
// finite-difference sample, and returns the worst relative error over every
// leaf. The builder must capture all of its constants by value so both paths
// see the identical graph.
double fd_max_err(std::vector<Tensor>& leaves,
                  const std::function<VarId(Tape&, const std::vector<VarId>&)>& build) {
  Tape tape;
  std::vector<VarId> ids;
  ids.reserve(leaves.size());
  for (const Tensor& leaf : leaves)
    ids.push_back(tape.param(leaf, static_cast<int>(ids.size())));
  tape.backward(build(tape, ids));

  std::vector<Tensor> analytic;
  analytic.reserve(ids.size());
  for (VarId id : ids) analytic.push_back(tape.grad(id));

  std::vector<Tensor*> ptrs;
  for (Tensor& leaf : leaves) ptrs.push_back(&leaf);
  auto f = [&leaves, &build]() {
    Tape t;
    std::vector<VarId> lids;
    lids.reserve(leaves.size());
    for (const Tensor& leaf : leaves)
      lids.push_back(t.param(leaf, static_cast<int>(lids.size())));
    return t.val(build(t, lids)).value();
  };
  std::vector<Tensor> numeric = rpr::finite_diff_grad(f, ptrs);

  double worst = 0.0;
  for (size_t i = 0; i < ids.size(); ++i)
    worst = std::max(worst, rpr::max_rel_error(analytic[i], numeric[i]));
  return worst;
}

constexpr double kFdTol = 1e-5;
constexpr double kKinkMargin = 1e-3;

}  // namespace

TEST_CASE("tensor basics") {
  Tensor t = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(t.rank() == 2);
  CHECK(t.numel() == 6);
  CHECK(t.at(0, 0) == 1.0);
  CHECK(t.at(1, 2) == 6.0);  // row major
  Tensor u = t;
  CHECK(u.bit_equal(t));
  u.at(1, 2) = 7.0;
  CHECK(!u.bit_equal(t));
  CHECK(t.at(1, 2) == 6.0);  // deep copy

  Tensor z({2, 2});
  CHECK(z.at(1, 1) == 0.0);
  Tensor s = Tensor::scalar(3.5);
  CHECK(s.rank() == 0);
  CHECK(s.value() == 3.5);
  Tensor f = Tensor::full({3}, 0.25);
  CHECK(f.at(2) == 0.25);
  CHECK(Tensor().empty());

  Tensor inf3 = Tensor::from({1}, {std::numeric_limits<double>::infinity()});
  CHECK(!inf3.all_finite());
  CHECK(t.all_finite());
}

TEST_CASE("rng determinism and bounds") {
  Rng a(123), b(123), c(124);
  bool all_same = true, any_diff = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform(), y = b.uniform(), z = c.uniform();
    all_same = all_same && x == y;
    any_diff = any_diff || x != z;
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  CHECK(all_same);
  CHECK(any_diff);

  Rng d(9);
  for (int i = 0; i < 200; ++i) CHECK(d.uniform_int(7) < 7);

  std::vector<int> v1{1, 2, 3, 4, 5, 6}, v2{1, 2, 3, 4, 5, 6};
  Rng s1(77), s2(77);
  s1.shuffle(v1);
  s2.shuffle(v2);
  CHECK(v1 == v2);
}

TEST_CASE("softmax hand values") {
  const double ln2 = std::log(2.0);
  Tensor out = rpr::softmax_fw(Tensor::from({2}, {ln2, 0.0}));
  CHECK(std::abs(out.at(0) - 2.0 / 3.0) < 1e-12);
  CHECK(std::abs(out.at(1) - 1.0 / 3.0) < 1e-12);

  Tensor flat = rpr::softmax_fw(Tensor::from({3}, {0.0, 0.0, 0.0}));
  for (int i = 0; i < 3; ++i) CHECK(std::abs(flat.at(i) - 1.0 / 3.0) < 1e-12);

  // Max shifting keeps large logits finite.
  Tensor big = rpr::softmax_fw(Tensor::from({2}, {1000.0, 0.0}));
  CHECK(big.all_finite());
  CHECK(std::abs(big.at(0) - 1.0) < 1e-12);
  CHECK(std::abs(big.at(0) + big.at(1) - 1.0) < 1e-12);

  Tensor neg = rpr::softmax_fw(Tensor::from({2}, {-1000.0, -1001.0}));
  CHECK(neg.all_finite());
  CHECK(std::abs(neg.at(0) + neg.at(1) - 1.0) < 1e-12);
}

TEST_CASE("softmax columns sum to one") {
  Rng rng(5);
  Tensor A = random_tensor({4, 3}, rng, -3.0, 3.0);
  Tensor S = rpr::softmax_columns_fw(A);
  for (int y = 0; y < 3; ++y) {
    double total = 0.0;
    for (int x = 0; x < 4; ++x) {
      CHECK(S.at(x, y) > 0.0);
      total += S.at(x, y);
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("affine relu with identity weights is relu") {
  Tensor X = Tensor::from({2, 3}, {1.0, -2.0, 0.5, -0.25, 3.0, 0.0});
  Tensor W({3, 3});
  for (int i = 0; i < 3; ++i) W.at(i, i) = 1.0;
  Tensor b({3});
  Tensor H = rpr::rows_affine_relu_fw(X, W, b);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) CHECK(H.at(i, j) == std::max(0.0, X.at(i, j)));
}

TEST_CASE("context convolution single token uses only the center slice") {
  // One-row document with width-3 filters: both off-center window positions
  // fall on implicit zero padding, so only the t=1 slice contributes.
  Tensor E = Tensor::from({1, 2}, {0.5, -0.25});
  Tensor F({3, 2, 2});
  F.at(1, 0, 0) = 1.0;
  F.at(1, 1, 0) = 1.0;   // filter 0 sums the embedding
  F.at(0, 0, 1) = 99.0;  // filter 1 only looks at padding rows
  F.at(2, 1, 1) = 99.0;
  Tensor bias({2});
  Tensor C = rpr::conv_context_fw(E, F, bias);
  CHECK(C.dim(0) == 1);
  CHECK(C.dim(1) == 2);
  CHECK(std::abs(C.at(0, 0) - 0.25) < 1e-15);  // relu(0.5 - 0.25)
  CHECK(C.at(0, 1) == 0.0);
}

TEST_CASE("context convolution shape errors") {
  Rng rng(3);
  Tensor E = random_tensor({4, 3}, rng);
  Tensor bias({2});
  CHECK_THROWS_AS(rpr::conv_context_fw(E, random_tensor({3, 5, 2}, rng), bias),
                  rpr::ShapeError);  // channel mismatch
  CHECK_THROWS_AS(rpr::conv_context_fw(E, random_tensor({2, 3, 2}, rng), bias),
                  rpr::ShapeError);  // even width
  CHECK_THROWS_AS(rpr::conv_context_fw(E, random_tensor({3, 3, 2}, rng), Tensor({3})),
                  rpr::ShapeError);  // bias length
  CHECK_THROWS_AS(rpr::rows_affine_relu_fw(E, random_tensor({2, 4}, rng), bias),
                  rpr::ShapeError);
  CHECK_THROWS_AS(rpr::softmax_fw(E), rpr::ShapeError);
  CHECK_THROWS_AS(rpr::matvec_t_fw(E, Tensor({3})), rpr::ShapeError);
}

TEST_CASE("embedding lookup gathers rows and rejects bad ids") {
  Tensor table = Tensor::from({3, 2}, {1, 2, 3, 4, 5, 6});
  Tensor E = rpr::embed_tokens(table, {2, 0, 2});
  CHECK(E.dim(0) == 3);
  CHECK(E.at(0, 0) == 5.0);
  CHECK(E.at(1, 1) == 2.0);
  CHECK(E.at(2, 1) == 6.0);
  CHECK_THROWS_AS(rpr::embed_tokens(table, {3}), rpr::LookupError);
  CHECK_THROWS_AS(rpr::embed_tokens(table, {-1}), rpr::LookupError);
}

TEST_CASE("max over rows keeps the first winner") {
  Tensor X = Tensor::from({3, 2}, {1.0, 5.0, 4.0, 5.0, 4.0, 2.0});
  std::vector<int> argmax;
  Tensor m = rpr::max_rows_fw(X, &argmax);
  CHECK(m.at(0) == 4.0);
  CHECK(m.at(1) == 5.0);
  CHECK(argmax[0] == 1);  // rows 1 and 2 tie on column 0; first wins
  CHECK(argmax[1] == 0);
}

TEST_CASE("attention scores against plain loops") {
  Rng rng(11);
  const int f = 4, P = 3, R = 2, hid = 3;
  Tensor M = random_tensor({f, P}, rng);
  Tensor V = random_tensor({f, R}, rng);
  Tensor W = random_tensor({hid, f}, rng);
  Tensor b = random_tensor({hid}, rng);
  Tensor h = random_tensor({hid}, rng);
  Tensor A = rpr::attention_scores_fw(M, V, W, b, h);
  REQUIRE(A.dim(0) == P);
  REQUIRE(A.dim(1) == R);
  for (int x = 0; x < P; ++x) {
    for (int y = 0; y < R; ++y) {
      double score = 0.0;
      for (int t = 0; t < hid; ++t) {
        double acc = b.at(t);
        for (int j = 0; j < f; ++j) acc += W.at(t, j) * (V.at(j, y) * M.at(j, x));
        score += h.at(t) * std::max(0.0, acc);
      }
      CHECK(std::abs(A.at(x, y) - score) < 1e-12);
    }
  }
}

TEST_CASE("tape forward values match the plain kernels") {
  Rng rng(21);
  Tensor X = random_tensor({3, 4}, rng);
  Tensor W = random_tensor({2, 4}, rng);
  Tensor b = random_tensor({2}, rng);
  Tape tape;
  VarId h = tape.rows_affine_relu(tape.param(X, 0), tape.param(W, 1), tape.param(b, 2));
  CHECK(tape.val(h).bit_equal(rpr::rows_affine_relu_fw(X, W, b)));
  VarId sm = tape.softmax(tape.sum_rows(h));
  CHECK(tape.val(sm).bit_equal(rpr::softmax_fw(rpr::sum_rows_fw(rpr::rows_affine_relu_fw(X, W, b)))));
}

TEST_CASE("backward is deterministic and accumulates shared inputs") {
  Rng rng(31);
  Tensor a = random_tensor({3}, rng);
  Tensor bval = random_tensor({3}, rng);
  auto run = [&]() {
    Tape tape;
    VarId va = tape.param(a, 0);
    VarId vb = tape.value(bval);
    // a participates twice; its gradient must be the sum of both paths.
    VarId root = tape.dot(tape.add(va, va), vb);
    tape.backward(root);
    return tape.grad(va);
  };
  Tensor g1 = run(), g2 = run();
  CHECK(g1.bit_equal(g2));
  for (int i = 0; i < 3; ++i) CHECK(std::abs(g1.at(i) - 2.0 * bval.at(i)) < 1e-15);
}

TEST_CASE("relu subgradient at an exact zero is zero") {
  // Pre-activation exactly 0.0 in one coordinate: the chosen subgradient is 0,
  // so no gradient may flow back through that coordinate.
  Tensor X = Tensor::from({1, 2}, {0.0, 2.0});
  Tensor W = Tensor::from({2, 2}, {1, 0, 0, 1});
  Tensor b({2});
  Tape tape;
  VarId vx = tape.param(X, 0);
  VarId h = tape.rows_affine_relu(vx, tape.value(W), tape.value(b));
  VarId root = tape.dot(tape.sum_rows(h), tape.value(Tensor::from({2}, {1.0, 1.0})));
  tape.backward(root);
  Tensor g = tape.grad(vx);
  CHECK(g.at(0, 0) == 0.0);
  CHECK(g.at(0, 1) == 1.0);
}

TEST_CASE("l1 subgradient is sign with sign(0) = 0") {
  Tensor a = Tensor::from({4}, {-2.0, 0.0, 3.0, -0.5});
  Tape tape;
  VarId va = tape.param(a, 0);
  tape.backward(tape.l1_sum(va));
  Tensor g = tape.grad(va);
  CHECK(g.at(0) == -1.0);
  CHECK(g.at(1) == 0.0);
  CHECK(g.at(2) == 1.0);
  CHECK(g.at(3) == -1.0);
  CHECK(std::abs(tape.val(tape.l1_sum(tape.value(a))).value() - 5.5) < 1e-15);
}

TEST_CASE("embedding pad row stays frozen") {
  Rng rng(41);
  Tensor table = random_tensor({4, 3}, rng);
  const int pad = 3;
  for (int j = 0; j < 3; ++j) table.at(pad, j) = 0.0;
  Tape tape;
  VarId vt = tape.param(table, 0);
  VarId E = tape.embed_rows(vt, {0, pad, 1, 0}, pad);
  VarId root = scalarize(tape, E, rng);
  tape.backward(root);
  Tensor g = tape.grad(vt);
  for (int j = 0; j < 3; ++j) CHECK(g.at(pad, j) == 0.0);
  // Row 0 appears twice; something must have accumulated there.
  double row0 = 0.0;
  for (int j = 0; j < 3; ++j) row0 += std::abs(g.at(0, j));
  CHECK(row0 > 0.0);
}

TEST_CASE("dropout scales kept values and masks gradients") {
  Rng rng(51);
  Tensor x = Tensor::full({40}, 1.0);
  Tape tape;
  VarId vx = tape.param(x, 0);
  Rng mask_rng(99);
  VarId y = tape.dropout(vx, 0.25, mask_rng);
  // Copy: later pushes may reallocate the slot the reference points into.
  const Tensor yv = tape.val(y);
  int kept = 0;
  for (int i = 0; i < 40; ++i) {
    const double v = yv.at(i);
    CHECK((v == 0.0 || std::abs(v - 1.0 / 0.75) < 1e-15));
    kept += v != 0.0;
  }
  CHECK(kept > 0);
  CHECK(kept < 40);
  tape.backward(tape.dot(y, tape.value(Tensor::full({40}, 1.0))));
  Tensor g = tape.grad(vx);
  for (int i = 0; i < 40; ++i) CHECK(g.at(i) == yv.at(i));  // mask times 1

  // Rate 0 is the identity.
  Tape t2;
  Rng r2(1);
  VarId same = t2.dropout(t2.param(x, 0), 0.0, r2);
  CHECK(t2.val(same).bit_equal(x));
}

// --- finite-difference certification over every differentiable op ----------

TEST_CASE("fd: elementwise and linear ops") {
  for (uint64_t trial = 0; trial < 12; ++trial) {
    Rng rng(rpr::derive_seed(1000, trial));
    std::vector<Tensor> leaves{random_tensor({3, 4}, rng), random_tensor({3, 4}, rng)};
    const double c = rng.uniform(0.5, 2.0);
    const uint64_t wseed = rng.next_u64();
    auto build = [c, wseed](Tape& t, const std::vector<VarId>& ids) {
      Rng wr(wseed);
      VarId m = t.mul(ids[0], ids[1]);
      VarId s = t.sub(t.add(m, ids[0]), t.scale(ids[1], c));
      return scalarize(t, s, wr);
    };
    CHECK(fd_max_err(leaves, build) < kFdTol);
  }
}

TEST_CASE("fd: softmax, transpose and matvec") {
  for (uint64_t trial = 0; trial < 12; ++trial) {
    Rng rng(rpr::derive_seed(2000, trial));
    std::vector<Tensor> leaves{random_tensor({4}, rng, -2.0, 2.0),
                               random_tensor({4, 3}, rng)};
    const uint64_t wseed = rng.next_u64();
    auto build = [wseed](Tape& t, const std::vector<VarId>& ids) {
      Rng wr(wseed);
      VarId sm = t.softmax(ids[0]);
      VarId mv = t.matvec_t(ids[1], sm);  // (3)
      VarId smc = t.softmax_columns(t.transpose(ids[1]));
      VarId both = t.add(t.matvec_t(smc, mv), t.sum_rows(t.transpose(ids[1])));
      return scalarize(t, both, wr);
    };
    CHECK(fd_max_err(leaves, build) < kFdTol);
  }
}

TEST_CASE("fd: row and vector affine relu away from kinks") {
  int done = 0;
  for (uint64_t attempt = 0; attempt < 200 && done < 12; ++attempt) {
    Rng rng(rpr::derive_seed(3000, attempt));
    Tensor X = random_tensor({4, 3}, rng);
    Tensor W = random_tensor({2, 3}, rng);
    Tensor b = random_tensor({2}, rng, -0.4, 0.4);
    double margin = 1e9;
    for (int i = 0; i < 4; ++i)
      for (int a = 0; a < 2; ++a) {
        double pre = b.at(a);
        for (int k = 0; k < 3; ++k) pre += W.at(a, k) * X.at(i, k);
        margin = std::min(margin, std::abs(pre));
      }
    if (margin < kKinkMargin) continue;  // too close to a relu kink; redraw
    std::vector<Tensor> leaves{X, W, b};
    const uint64_t wseed = rng.next_u64();
    auto build = [wseed](Tape& t, const std::vector<VarId>& ids) {
      Rng wr(wseed);
      VarId H = t.rows_affine_relu(ids[0], ids[1], ids[2]);
      return scalarize(t, H, wr);
    };
    CHECK(fd_max_err(leaves, build) < kFdTol);
    ++done;
  }
  CHECK(done == 12);
}

TEST_CASE("fd: context convolution away from kinks") {
  int done = 0;
  for (uint64_t attempt = 0; attempt < 200 && done < 12; ++attempt) {
    Rng rng(rpr::derive_seed(4000, attempt));
    const int l = 5, d = 3, nf = 2, c = 3;
    Tensor E = random_tensor({l, d}, rng);
    Tensor F = random_tensor({c, d, nf}, rng);
    Tensor b = random_tensor({nf}, rng, -0.3, 0.3);
    double margin = 1e9;
    for (int i = 0; i < l; ++i)
      for (int k = 0; k < nf; ++k) {
        double pre = b.at(k);
        for (int t = 0; t < c; ++t) {
          const int pos = i + t - 1;
          if (pos < 0 || pos >= l) continue;
          for (int j = 0; j < d; ++j) pre += E.at(pos, j) * F.at(t, j, k);
        }
        margin = std::min(margin, std::abs(pre));
      }
    if (margin < kKinkMargin) continue;
    std::vector<Tensor> leaves{E, F, b};
    const uint64_t wseed = rng.next_u64();
    auto build = [wseed](Tape& t, const std::vector<VarId>& ids) {
      Rng wr(wseed);
      VarId C = t.conv_context(ids[0], ids[1], ids[2]);
      return scalarize(t, C, wr);
    };
    CHECK(fd_max_err(leaves, build) < kFdTol);
    ++done;
  }
  CHECK(done == 12);
}

TEST_CASE("fd: max over rows away from ties") {
  int done = 0;
  for (uint64_t attempt = 0; attempt < 200 && done < 12; ++attempt) {
    Rng rng(rpr::derive_seed(5000, attempt));
    Tensor X = random_tensor({4, 3}, rng);
    double margin = 1e9;
    for (int j = 0; j < 3; ++j) {
      double top = -1e9, second = -1e9;
      for (int i = 0; i < 4; ++i) {
        const double v = X.at(i, j);
        if (v > top) {
          second = top;
          top = v;
        } else if (v > second) {
          second = v;
        }
      }
      margin = std::min(margin, top - second);
    }
    if (margin < kKinkMargin) continue;  // near-tied maxima make FD ambiguous
    std::vector<Tensor> leaves{X};
    const uint64_t wseed = rng.next_u64();
    auto build = [wseed](Tape& t, const std::vector<VarId>& ids) {
      Rng wr(wseed);
      return scalarize(t, t.max_rows(ids[0]), wr);
    };
    CHECK(fd_max_err(leaves, build) < kFdTol);
    ++done;
  }
  CHECK(done == 12);
}

TEST_CASE("fd: attention scores away from kinks") {
  int done = 0;
  for (uint64_t attempt = 0; attempt < 300 && done < 12; ++attempt) {
    Rng rng(rpr::derive_seed(6000, attempt));
    const int f = 3, P = 2, R = 2, hid = 3;
    Tensor M = random_tensor({f, P}, rng);
    Tensor V = random_tensor({f, R}, rng);
    Tensor W = random_tensor({hid, f}, rng);
    Tensor b = random_tensor({hid}, rng, -0.4, 0.4);
    Tensor h = random_tensor({hid}, rng);
    double margin = 1e9;
    for (int x = 0; x < P; ++x)
      for (int y = 0; y < R; ++y)
        for (int t = 0; t < hid; ++t) {
          double pre = b.at(t);
          for (int j = 0; j < f; ++j) pre += W.at(t, j) * (V.at(j, y) * M.at(j, x));
          margin = std::min(margin, std::abs(pre));
        }
    if (margin < kKinkMargin) continue;
    std::vector<Tensor> leaves{M, V, W, b, h};
    const uint64_t wseed = rng.next_u64();
    auto build = [wseed](Tape& t, const std::vector<VarId>& ids) {
      Rng wr(wseed);
      VarId A = t.attention_scores(ids[0], ids[1], ids[2], ids[3], ids[4]);
      return scalarize(t, t.softmax_columns(A), wr);
    };
    CHECK(fd_max_err(leaves, build) < kFdTol);
    ++done;
  }
  CHECK(done == 12);
}

TEST_CASE("fd: embedding gather with repeated ids") {
  for (uint64_t trial = 0; trial < 12; ++trial) {
    Rng rng(rpr::derive_seed(7000, trial));
    Tensor table = random_tensor({5, 3}, rng);
    const int pad = 4;
    for (int j = 0; j < 3; ++j) table.at(pad, j) = 0.0;
    std::vector<Tensor> leaves{table};
    // Repeats force gradient accumulation; pad itself is excluded because its
    // row is frozen by design (covered by a dedicated test above).
    const std::vector<int> ids{0, 2, 0, 3, 2};
    const uint64_t wseed = rng.next_u64();
    auto build = [ids, pad, wseed](Tape& t, const std::vector<VarId>& vars) {
      Rng wr(wseed);
      return scalarize(t, t.embed_rows(vars[0], ids, pad), wr);
    };
    CHECK(fd_max_err(leaves, build) < kFdTol);
  }
}

TEST_CASE("fd: regularizers and dropout") {
  int done = 0;
  for (uint64_t attempt = 0; attempt < 200 && done < 12; ++attempt) {
    Rng rng(rpr::derive_seed(8000, attempt));
    Tensor a = random_tensor({3, 3}, rng);
    double margin = 1e9;
    for (size_t i = 0; i < a.numel(); ++i) margin = std::min(margin, std::abs(a.data()[i]));
    if (margin < kKinkMargin) continue;  // |x| kink at zero
    std::vector<Tensor> leaves{a};
    const uint64_t mask_seed = rng.next_u64();
    auto build = [mask_seed](Tape& t, const std::vector<VarId>& ids) {
      // The mask is redrawn from the same seed on every rebuild, so finite
      // differences see a fixed dropout pattern.
      Rng mask_rng(mask_seed);
      VarId dropped = t.dropout(ids[0], 0.3, mask_rng);
      VarId reg = t.add(t.scale(t.l1_sum(ids[0]), 0.7), t.l2_sum(dropped));
      return reg;
    };
    CHECK(fd_max_err(leaves, build) < kFdTol);
    ++done;
  }
  CHECK(done == 12);
}

TEST_CASE("fd: pick row feeds a single factor row") {
  for (uint64_t trial = 0; trial < 8; ++trial) {
    Rng rng(rpr::derive_seed(9000, trial));
    Tensor Pm = random_tensor({4, 3}, rng);
    Tensor Qm = random_tensor({4, 3}, rng);
    const int row = static_cast<int>(rng.uniform_int(4));
    std::vector<Tensor> leaves{Pm, Qm};
    auto build = [row](Tape& t, const std::vector<VarId>& ids) {
      return t.dot(t.pick_row(ids[0], row), t.pick_row(ids[1], row));
    };
    CHECK(fd_max_err(leaves, build) < kFdTol);
  }
}

TEST_CASE("max_rel_error uses the symmetric denominator") {
  Tensor a = Tensor::from({2}, {1.0, 0.0});
  Tensor n = Tensor::from({2}, {1.0 + 1e-6, 0.0});
  const double err = rpr::max_rel_error(a, n);
  CHECK(err > 0.9e-6);
  CHECK(err < 1.1e-6);
  CHECK(rpr::max_rel_error(a, a) == 0.0);
}
