// Copyright (c) the ORLC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ORLC_ADAM_HPP_
#define ORLC_ADAM_HPP_

#include <cstdint>
#include <vector>

#include "orlc/tensor.hpp"

namespace orlc {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moment buffers for one ordered parameter list.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  int64_t t = 0;  // applied steps

  void init_like(const std::vector<Tensor>& params);
};

// Standard bias-corrected update for step t = state.t + 1. grads[i] pairs
// with params[i]. If any gradient element is non-finite the whole step is
// skipped (state untouched) and false is returned.
bool adam_step(std::vector<Tensor>& params, const std::vector<std::span<const double>>& grads,
               AdamState& state, const AdamConfig& config);

}  // namespace orlc

#endif  // ORLC_ADAM_HPP_
