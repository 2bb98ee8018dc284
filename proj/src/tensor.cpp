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

#include "rpr/tensor.hpp"

#include <cmath>
#include <cstring>
#include <string>

namespace rpr {

namespace {
size_t checked_numel(const std::vector<int>& shape) {
  if (shape.size() > 3) throw ShapeError("tensor rank > 3 not supported");
  size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw ShapeError("negative tensor dimension");
    n *= static_cast<size_t>(d);
  }
  return n;
}
}  // namespace

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
  data_.assign(checked_numel(shape_), 0.0);
}

Tensor Tensor::full(std::vector<int> shape, double v) {
  Tensor t(std::move(shape));
  t.fill(v);
  return t;
}

Tensor Tensor::scalar(double v) {
  Tensor t{std::vector<int>{}};
  t.data_[0] = v;
  return t;
}

Tensor Tensor::from(std::vector<int> shape, std::vector<double> data) {
  Tensor t;
  t.shape_ = std::move(shape);
  if (checked_numel(t.shape_) != data.size()) throw ShapeError("tensor data does not match shape");
  t.data_ = std::move(data);
  return t;
}

double Tensor::value() const {
  if (numel() != 1) throw ShapeError("value() on non-scalar tensor");
  return data_[0];
}

void Tensor::fill(double v) {
  for (double& x : data_) x = v;
}

bool Tensor::all_finite() const {
  for (double x : data_)
    if (!std::isfinite(x)) return false;
  return true;
}

bool Tensor::bit_equal(const Tensor& o) const {
  return shape_ == o.shape_ &&
         std::memcmp(data_.data(), o.data_.data(), data_.size() * sizeof(double)) == 0;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) throw ShapeError(std::string(op) + ": shape mismatch");
}

}  // namespace rpr
