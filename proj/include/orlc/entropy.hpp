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

#ifndef ORLC_ENTROPY_HPP_
#define ORLC_ENTROPY_HPP_

#include <cstdint>

#include "orlc/tensor.hpp"

namespace orlc {

// Probability that a latent in channel (mu, s) quantizes to integer v under
// the per-channel logistic model: sigma((v+.5-mu)/s) - sigma((v-.5-mu)/s).
// Tail-stable; used by the differentiable rate term and the coder tables.
double channel_bin_prob(double mu, double s, double v);

inline constexpr double kProbFloor = 1e-9;

// Training-time quantization: y + u with u iid uniform on [-0.5, 0.5),
// deterministic in seed. The noise is a constant of the graph, so gradients
// pass through to y unchanged.
Tensor quantize_train(const Tensor& y, uint64_t seed, Tape* tape);

// Inference rounding, ties away from zero.
Tensor quantize_infer(const Tensor& y);

// Total code length estimate in bits: sum over elements of
// -log2(max(kProbFloor, P_c(v))). Differentiable w.r.t. y_tilde, mu and
// log_scale. y_tilde is BxMxhxw; mu and log_scale are {M}.
Tensor bits_estimate(const Tensor& y_tilde, const Tensor& mu, const Tensor& log_scale, Tape* tape);

}  // namespace orlc

#endif  // ORLC_ENTROPY_HPP_
