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

#include "orlc/adam.hpp"

#include <cmath>

#include "orlc/util.hpp"

namespace orlc {

void AdamState::init_like(const std::vector<Tensor>& params) {
  m.clear();
  v.clear();
  for (const Tensor& p : params) {
    m.emplace_back(p.values().size(), 0.0);
    v.emplace_back(p.values().size(), 0.0);
  }
  t = 0;
}

bool adam_step(std::vector<Tensor>& params, const std::vector<std::span<const double>>& grads,
               AdamState& state, const AdamConfig& config) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw Error("adam_step: parameter/gradient/state size mismatch");
  }
  for (size_t i = 0; i < params.size(); ++i) {
    if (grads[i].size() != params[i].values().size()) {
      throw Error("adam_step: gradient shape mismatch at index " + std::to_string(i));
    }
    for (double g : grads[i]) {
      if (!std::isfinite(g)) return false;
    }
  }
  const int64_t t = state.t + 1;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
  for (size_t i = 0; i < params.size(); ++i) {
    double* p = params[i].values().data();
    double* m = state.m[i].data();
    double* v = state.v[i].data();
    const double* g = grads[i].data();
    const size_t n = grads[i].size();
    for (size_t j = 0; j < n; ++j) {
      m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * g[j];
      v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p[j] -= config.lr * mhat / (std::sqrt(vhat) + config.eps);
    }
  }
  state.t = t;
  return true;
}

}  // namespace orlc
