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

#ifndef ORLC_GRAD_CHECK_HPP_
#define ORLC_GRAD_CHECK_HPP_

#include <functional>

#include "orlc/tensor.hpp"

namespace orlc {

struct FiniteDiffReport {
  double max_rel_err = 0.0;
  int64_t worst_index = -1;
  bool finite = true;  // false if any f evaluation was non-finite
  bool pass = false;
};

// Compares the analytic gradient of f at x against central differences
// (f(x+h*e_i) - f(x-h*e_i)) / (2h), coordinate by coordinate. The relative
// error denominator is max(|analytic|, |numeric|, 1e-8) so that zero
// gradients compare absolutely. f must be deterministic; it receives a tape
// for the analytic pass and nullptr for the (tape-free) numeric probes.
FiniteDiffReport finite_diff_check(const std::function<Tensor(const Tensor&, Tape*)>& f,
                                   const Tensor& x, double h, double tol);

}  // namespace orlc

#endif  // ORLC_GRAD_CHECK_HPP_
