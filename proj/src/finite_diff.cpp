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

#include "rpr/finite_diff.hpp"

#include <cmath>
#include <string>

namespace rpr {

std::vector<Tensor> finite_diff_grad(const std::function<double()>& f,
                                     const std::vector<Tensor*>& params, double h) {
  if (h <= 0.0) throw OracleError("finite_diff_grad: step must be positive");
  std::vector<Tensor> grads;
  grads.reserve(params.size());
  for (size_t p = 0; p < params.size(); ++p) {
    Tensor* t = params[p];
    Tensor g(t->shape());
    for (size_t i = 0; i < t->numel(); ++i) {
      const double orig = t->data()[i];
      t->data()[i] = orig + h;
      const double up = f();
      t->data()[i] = orig - h;
      const double down = f();
      t->data()[i] = orig;
      if (!std::isfinite(up) || !std::isfinite(down))
        throw OracleError("finite_diff_grad: non-finite sample at parameter " +
                          std::to_string(p) + ", coordinate " + std::to_string(i));
      g.data()[i] = (up - down) / (2.0 * h);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

double max_rel_error(const Tensor& analytic, const Tensor& numeric, double floor) {
  require_same_shape(analytic, numeric, "max_rel_error");
  double worst = 0.0;
  for (size_t i = 0; i < analytic.numel(); ++i) {
    const double a = analytic.data()[i];
    const double n = numeric.data()[i];
    const double denom = std::max(std::max(std::fabs(a), std::fabs(n)), floor);
    worst = std::max(worst, std::fabs(a - n) / denom);
  }
  return worst;
}

}  // namespace rpr
