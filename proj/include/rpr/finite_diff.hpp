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

#include "rpr/tensor.hpp"

namespace rpr {

// Central-difference gradient oracle. f evaluates the scalar objective with
// the current contents of params; each coordinate is perturbed by +-h in
// place and restored bit-exactly. Throws OracleError when f returns a
// non-finite sample, naming the offending parameter and coordinate.
std::vector<Tensor> finite_diff_grad(const std::function<double()>& f,
                                     const std::vector<Tensor*>& params, double h = 1e-4);

// max_i |a_i - n_i| / max(|a_i|, |n_i|, floor)
double max_rel_error(const Tensor& analytic, const Tensor& numeric, double floor = 1e-8);

}  // namespace rpr
